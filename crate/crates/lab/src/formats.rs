//! Debug text formats.
//!
//! Configurations are written as a small header followed by one line per
//! row, top row first, in run-length form: `3o2c` is three open sites then
//! two closed ones.
//!
//! ```text
//! lattice = triangular
//! center = 0 0
//! radius = 2
//! 5o
//! 2c3o
//! o3co
//! 5c
//! 2o3c
//! ```
//!
//! Paths are written as a `# kind` line followed by one `x y` pair per line.

use std::fmt::Write as _;

use anyhow::{anyhow, bail, Context, Result};
use pivotal_core::features::{CrossingPath, PathKind};
use pivotal_core::lattice::{BoxRegion, LatticeKind, Site};
use pivotal_core::sampling::{Configuration, SiteField};

pub fn write_config<F: SiteField>(field: &F) -> String {
    let b = field.bounds();
    let mut s = String::new();
    writeln!(s, "lattice = {}", field.lattice().name()).unwrap();
    writeln!(s, "center = {} {}", b.center.x, b.center.y).unwrap();
    writeln!(s, "radius = {}", b.radius).unwrap();
    for y in (b.ymin()..=b.ymax()).rev() {
        let mut x = b.xmin();
        while x <= b.xmax() {
            let open = field.is_open(Site::new(x, y));
            let mut run = 0;
            while x <= b.xmax() && field.is_open(Site::new(x, y)) == open {
                run += 1;
                x += 1;
            }
            if run > 1 {
                write!(s, "{run}").unwrap();
            }
            s.push(if open { 'o' } else { 'c' });
        }
        s.push('\n');
    }
    s
}

pub fn parse_config(text: &str) -> Result<Configuration> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let mut header = |key: &str| -> Result<String> {
        let line = lines.next().ok_or_else(|| anyhow!("missing `{key}` line"))?;
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("expected `{key} = ...`, got `{line}`"))?;
        if k.trim() != key {
            bail!("expected `{key}`, got `{}`", k.trim());
        }
        Ok(v.trim().to_string())
    };
    let lattice: LatticeKind = header("lattice")?.parse().map_err(|_| anyhow!("unknown lattice"))?;
    let center = header("center")?;
    let mut it = center.split_whitespace().map(str::parse::<i32>);
    let (Some(Ok(cx)), Some(Ok(cy)), None) = (it.next(), it.next(), it.next()) else {
        bail!("center must be two integers");
    };
    let radius: u32 = header("radius")?.parse().context("radius")?;
    let b = BoxRegion::new(Site::new(cx, cy), radius);
    let w = b.width();
    let mut open = vec![false; b.len()];
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        let y = b.ymax() - r as i32;
        if y < b.ymin() {
            bail!("more than {w} rows");
        }
        let mut col = 0usize;
        let mut digits = String::new();
        for ch in line.chars() {
            match ch {
                '0'..='9' => digits.push(ch),
                'o' | 'c' => {
                    let run: usize = if digits.is_empty() { 1 } else { digits.parse()? };
                    digits.clear();
                    if col + run > w {
                        bail!("row {} is longer than {w}", r + 1);
                    }
                    for k in col..col + run {
                        open[b.index(Site::new(b.xmin() + k as i32, y))] = ch == 'o';
                    }
                    col += run;
                }
                _ => bail!("unexpected character `{ch}` in row {}", r + 1),
            }
        }
        if col != w || !digits.is_empty() {
            bail!("row {} has {col} sites, expected {w}", r + 1);
        }
        rows += 1;
    }
    if rows != w {
        bail!("expected {w} rows, got {rows}");
    }
    Ok(Configuration::from_fn(lattice, b, |s| open[b.index(s)]))
}

fn kind_name(k: PathKind) -> &'static str {
    match k {
        PathKind::Lowest => "lowest",
        PathKind::Highest => "highest",
        PathKind::Exploration => "exploration",
    }
}

pub fn write_path(p: &CrossingPath) -> String {
    let mut s = format!("# {}\n", kind_name(p.kind));
    for site in &p.sites {
        writeln!(s, "{} {}", site.x, site.y).unwrap();
    }
    s
}

pub fn parse_path(text: &str) -> Result<CrossingPath> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let head = lines.next().ok_or_else(|| anyhow!("empty path"))?;
    let kind = match head.strip_prefix('#').map(str::trim) {
        Some("lowest") => PathKind::Lowest,
        Some("highest") => PathKind::Highest,
        Some("exploration") => PathKind::Exploration,
        _ => bail!("unknown path header `{head}`"),
    };
    let sites = lines
        .map(|l| {
            let mut it = l.split_whitespace().map(str::parse::<i32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) => Ok(Site::new(x, y)),
                _ => Err(anyhow!("bad coordinate line `{l}`")),
            }
        })
        .collect::<Result<_>>()?;
    Ok(CrossingPath { kind, sites })
}

#[cfg(test)]
mod tests {
    use super::*;
    use pivotal_core::features::lowest_crossing;
    use pivotal_core::rng::TrialKey;
    use pivotal_core::sampling::sample;

    #[test]
    fn config_round_trip() {
        for lattice in [LatticeKind::Triangular, LatticeKind::SquareSite] {
            let c = sample(lattice, BoxRegion::new(Site::new(3, -2), 5), 0.5, TrialKey::new(1, 2, 3)).unwrap();
            let text = write_config(&c);
            let back = parse_config(&text).unwrap();
            assert!(c.bounds().sites().all(|s| back.is_open(s) == c.is_open(s)));
            assert_eq!(write_config(&back), text);
        }
    }

    #[test]
    fn config_example() {
        let c = Configuration::from_fn(LatticeKind::Triangular, BoxRegion::centered(1), |s| s.y == 0 || s.x == 1);
        assert_eq!(write_config(&c), "lattice = triangular\ncenter = 0 0\nradius = 1\n2co\n3o\n2co\n");
    }

    #[test]
    fn config_errors() {
        assert!(parse_config("lattice = hex\n").is_err());
        let head = "lattice = tri\ncenter = 0 0\nradius = 1\n";
        assert!(parse_config(&format!("{head}3o\n3o\n")).is_err());
        assert!(parse_config(&format!("{head}3o\n4o\n3o\n")).is_err());
        assert!(parse_config(&format!("{head}3o\n2x\n3o\n")).is_err());
        assert!(parse_config(&format!("{head}3o\n3o\n3o\n")).is_ok());
    }

    #[test]
    fn path_round_trip() {
        let c = sample(LatticeKind::Triangular, BoxRegion::centered(6), 0.6, TrialKey::new(5, 5, 5)).unwrap();
        let p = lowest_crossing(&c).unwrap();
        assert_eq!(parse_path(&write_path(&p)).unwrap(), p);
        assert!(parse_path("# sideways\n1 2\n").is_err());
        assert!(parse_path("# lowest\n1\n").is_err());
    }
}
