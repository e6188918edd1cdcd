//! File formats: point sets as text, grids and families as JSON.
//!
//! A point-set file starts with the header `k M mode` (`mode` is `box` or
//! `signed`; in signed mode `M` is the half width `N'`), followed by one
//! point per line with whitespace-separated coordinates. Blank lines and
//! lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{AnisoBox, Geometry, GridSpec, Point, PointSet, Sign};

pub fn write_point_set<W: Write>(set: &PointSet, mut out: W) -> Result<()> {
    let g = set.geometry();
    writeln!(out, "{} {} {}", g.k(), g.size_parameter(), g.mode())?;
    let mut line = String::new();
    for p in set.points() {
        line.clear();
        for (i, x) in p.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            write!(line, "{x}").expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn point_set_to_string(set: &PointSet) -> String {
    let mut buf = Vec::new();
    write_point_set(set, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn read_point_set<R: BufRead>(input: R) -> Result<PointSet> {
    let mut lines = input.lines().enumerate().filter(|(_, l)| match l {
        Ok(s) => {
            let t = s.trim();
            !t.is_empty() && !t.starts_with('#')
        }
        Err(_) => true,
    });
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse("missing header line `k M mode`".into()))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(Error::Parse(format!(
            "bad header `{header}`: expected `k M mode`"
        )));
    }
    let k: usize = fields[0]
        .parse()
        .map_err(|_| Error::Parse(format!("bad dimension `{}`", fields[0])))?;
    let size: u64 = fields[1]
        .parse()
        .map_err(|_| Error::Parse(format!("bad size `{}`", fields[1])))?;
    let geometry = match fields[2] {
        "box" => Geometry::Box(AnisoBox::new(size, k)?),
        "signed" => Geometry::signed(
            i64::try_from(size).map_err(|_| Error::Overflow("reading N'"))?,
            k,
        )?,
        other => return Err(Error::Parse(format!("unknown mode `{other}`"))),
    };
    let mut points: Vec<Point> = Vec::new();
    for (lineno, line) in lines {
        let line = line?;
        let p: Point = line
            .split_whitespace()
            .map(|t| {
                t.parse::<i64>()
                    .map_err(|_| Error::Parse(format!("line {}: bad coordinate `{t}`", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        if p.len() != k {
            return Err(Error::Parse(format!(
                "line {}: expected {k} coordinates, found {}",
                lineno + 1,
                p.len()
            )));
        }
        points.push(p);
    }
    PointSet::new(geometry, points)
}

pub fn read_point_set_file(path: &std::path::Path) -> Result<PointSet> {
    let f = std::fs::File::open(path)?;
    read_point_set(std::io::BufReader::new(f))
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    base: Vec<String>,
    q: String,
    #[serde(rename = "L")]
    l: String,
    sign: i64,
}

impl Serialize for GridSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GridRepr {
            base: self.base().iter().map(|x| x.to_string()).collect(),
            q: self.q().to_string(),
            l: self.l().to_string(),
            sign: self.sign().as_i64(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = GridRepr::deserialize(d)?;
        let base = r
            .base
            .iter()
            .map(|x| x.parse::<i64>().map_err(D::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let q = r.q.parse::<u64>().map_err(D::Error::custom)?;
        let l = r.l.parse::<u64>().map_err(D::Error::custom)?;
        let sign = Sign::from_i64(r.sign).map_err(D::Error::custom)?;
        GridSpec::new(base, q, l, sign).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_set_text_round_trip() {
        let b = AnisoBox::new(3, 2).unwrap();
        let s = PointSet::in_box(b, vec![vec![1, 9], vec![2, 3]]).unwrap();
        let text = point_set_to_string(&s);
        assert_eq!(text, "2 3 box\n1 9\n2 3\n");
        let back = read_point_set(text.as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn signed_mode_and_comments() {
        let text = "# lifted set\n2 4 signed\n-4 3\n\n0 0\n";
        let s = read_point_set(text.as_bytes()).unwrap();
        assert_eq!(s.geometry().mode(), "signed");
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(read_point_set("".as_bytes()).is_err());
        assert!(read_point_set("2 3 torus\n".as_bytes()).is_err());
        assert!(read_point_set("2 3 box\n1 2 3\n".as_bytes()).is_err());
        assert!(read_point_set("2 3 box\n4 1\n".as_bytes()).is_err());
    }

    #[test]
    fn grid_json_uses_strings() {
        let g = GridSpec::new(vec![-1, 5], 3, 2, Sign::Minus).unwrap();
        let json = serde_json::to_string(&g).unwrap();
        assert_eq!(json, r#"{"base":["-1","5"],"q":"3","L":"2","sign":-1}"#);
        let back: GridSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
    }
}
