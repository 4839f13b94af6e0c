//! Region enumeration: partition an input domain into boxes labelled with
//! their covering hierarchy level.

use std::cmp::Ordering;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::{Hierarchy, LevelId};
use crate::interval::InputBox;
use crate::network::Network;
use crate::verifier::{covering_level, map_ordered};

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub bx: InputBox,
    pub level: LevelId,
    /// False when the region hit `min_width` while still covered only by the universe.
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub domain: InputBox,
    pub min_width: f64,
    /// Sorted lexicographically by lower corner.
    pub regions: Vec<Region>,
}

impl RegionMap {
    pub fn total_volume(&self) -> f64 {
        self.regions.iter().map(|r| r.bx.volume()).sum()
    }

    /// True when every region stopped on a minimal level rather than on `min_width`.
    pub fn is_exact(&self, h: &Hierarchy) -> bool {
        self.regions.iter().all(|r| h.is_minimal(r.level))
    }
}

/// Recursive widest-dimension bisection. A region stops splitting when its
/// covering level is minimal in the hierarchy or its widest side is below
/// `min_width`.
pub fn enumerate_regions(
    net: &Network,
    h: &Hierarchy,
    domain: &InputBox,
    min_width: f64,
) -> Result<RegionMap> {
    if min_width.is_nan() || min_width <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "min_width must be positive, got {min_width}"
        )));
    }
    if h.num_classes() != net.output_dim() {
        return Err(Error::DimensionMismatch {
            what: "hierarchy classes",
            expected: net.output_dim(),
            found: h.num_classes(),
        });
    }
    let mut regions = Vec::new();
    let mut frontier = vec![domain.clone()];
    while !frontier.is_empty() {
        let levels = map_ordered(&frontier, |_, node| covering_level(net, h, node));
        let mut next = Vec::new();
        for (node, level) in frontier.into_iter().zip(levels) {
            let level = level?;
            if h.is_minimal(level) || node.max_width() < min_width {
                regions.push(Region {
                    resolved: !h.is_universe(level),
                    level,
                    bx: node,
                });
            } else {
                let split = node.split(node.widest_dim())?;
                next.push(split.lower);
                next.push(split.upper);
            }
        }
        frontier = next;
    }
    regions.sort_by(|a, b| cmp_lower_corner(&a.bx, &b.bx));
    Ok(RegionMap {
        domain: domain.clone(),
        min_width,
        regions,
    })
}

fn cmp_lower_corner(a: &InputBox, b: &InputBox) -> Ordering {
    a.dims()
        .iter()
        .zip(b.dims())
        .map(|(x, y)| x.lo().total_cmp(&y.lo()))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::InvalidConfig(format!(
                "unsupported region format `{other}`"
            ))),
        }
    }
}

#[derive(Serialize)]
struct RegionRecord<'a> {
    lower: Vec<f64>,
    upper: Vec<f64>,
    level: &'a str,
    members: Vec<&'a str>,
    resolved: bool,
    volume: f64,
}

/// Writes one record per region. CSV columns are
/// `dim0_lo, dim0_hi, ..., level, resolved, volume`.
pub fn export_regions<W: Write>(
    map: &RegionMap,
    h: &Hierarchy,
    format: ExportFormat,
    out: W,
) -> Result<()> {
    match format {
        ExportFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<String> = (0..map.domain.len())
                .flat_map(|i| [format!("dim{i}_lo"), format!("dim{i}_hi")])
                .collect();
            header.extend(["level", "resolved", "volume"].map(String::from));
            w.write_record(&header)?;
            for r in &map.regions {
                let mut row: Vec<String> =
                    r.bx.dims()
                        .iter()
                        .flat_map(|d| [d.lo().to_string(), d.hi().to_string()])
                        .collect();
                row.push(h.level(r.level).name.clone());
                row.push(r.resolved.to_string());
                row.push(r.bx.volume().to_string());
                w.write_record(&row)?;
            }
            w.flush()?;
        }
        ExportFormat::Json => {
            let records: Vec<RegionRecord> = map
                .regions
                .iter()
                .map(|r| {
                    let level = h.level(r.level);
                    RegionRecord {
                        lower: r.bx.dims().iter().map(|d| d.lo()).collect(),
                        upper: r.bx.dims().iter().map(|d| d.hi()).collect(),
                        level: &level.name,
                        members: level.members.iter().map(|c| h.label_of(c)).collect(),
                        resolved: r.resolved,
                        volume: r.bx.volume(),
                    }
                })
                .collect();
            serde_json::to_writer_pretty(out, &records).map_err(|source| Error::Parse {
                field: "regions".into(),
                source,
            })?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classes::ClassSet;
    use crate::fixtures;
    use crate::hierarchy::Level;
    use crate::interval::Interval;

    #[test]
    fn headline_domain_is_one_safe_region() {
        let net = fixtures::hierarchy_network();
        let h = fixtures::tolerance_hierarchy();
        let map = enumerate_regions(&net, &h, &fixtures::headline_box(), 1.0 / 64.0).unwrap();
        assert_eq!(map.regions.len(), 1);
        assert_eq!(Some(map.regions[0].level), h.find("safe"));
        assert!(map.is_exact(&h));
    }

    #[test]
    fn widened_domain_has_tolerable_regions() {
        let net = fixtures::hierarchy_network();
        let h = fixtures::tolerance_hierarchy();
        let map = enumerate_regions(&net, &h, &fixtures::unit_box(3), 1.0 / 16.0).unwrap();
        let tolerable = h.find("tolerable").unwrap();
        assert!(map.regions.iter().any(|r| r.level == tolerable));
        assert!(map.regions.iter().any(|r| Some(r.level) == h.find("safe")));
        assert!((map.total_volume() - 1.0).abs() < 1e-9);
        for w in map.regions.windows(2) {
            assert_ne!(cmp_lower_corner(&w[0].bx, &w[1].bx), Ordering::Greater);
        }
    }

    #[test]
    fn point_domain() {
        let net = fixtures::hierarchy_network();
        let h = fixtures::tolerance_hierarchy();
        let map =
            enumerate_regions(&net, &h, &InputBox::from_point(&[0.0, 0.0, 0.0]), 0.1).unwrap();
        assert_eq!(map.regions.len(), 1);
        // argmax at the origin is c1
        assert_eq!(
            h.level(map.regions[0].level).members,
            ClassSet::from([1, 2, 3, 5])
        );
    }

    #[test]
    fn rejects_bad_width() {
        let net = fixtures::hierarchy_network();
        let h = fixtures::tolerance_hierarchy();
        assert!(enumerate_regions(&net, &h, &fixtures::unit_box(3), 0.0).is_err());
        assert!(enumerate_regions(&net, &h, &fixtures::unit_box(3), f64::NAN).is_err());
    }

    fn single_region(level: LevelId) -> RegionMap {
        let domain = InputBox::new(vec![Interval::new(0.0, 1.0).unwrap()]);
        RegionMap {
            regions: vec![Region {
                bx: domain.clone(),
                level,
                resolved: true,
            }],
            domain,
            min_width: 0.1,
        }
    }

    #[test]
    fn csv_export() {
        let h = Hierarchy::new(2, vec![Level::new("safe", [1])]).unwrap();
        let map = single_region(h.find("safe").unwrap());
        let mut buf = Vec::new();
        export_regions(&map, &h, ExportFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dim0_lo,dim0_hi,level,resolved,volume\n0,1,safe,true,1\n"
        );

        let empty = RegionMap {
            regions: vec![],
            ..map.clone()
        };
        let mut buf = Vec::new();
        export_regions(&empty, &h, ExportFormat::Csv, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "dim0_lo,dim0_hi,level,resolved,volume\n"
        );
    }

    #[test]
    fn json_export() {
        let h = Hierarchy::new(2, vec![Level::new("safe", [1])]).unwrap();
        let map = single_region(h.find("safe").unwrap());
        let mut buf = Vec::new();
        export_regions(&map, &h, ExportFormat::Json, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v[0]["level"], "safe");
        assert_eq!(v[0]["members"][0], "c1");
        assert_eq!(v[0]["volume"], 1.0);
        assert!("xml".parse::<ExportFormat>().is_err());
    }
}
