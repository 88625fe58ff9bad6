//! Reader and writer for the TSPLIB subset used here: `TYPE` TSP or CVRP,
//! `EDGE_WEIGHT_TYPE: EUC_2D`, node coordinates, and for CVRP the capacity,
//! demand and depot sections.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::routing::{Metric, Problem, RoutingError, RoutingInstance};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unsupported edge weight type {0:?}")]
    UnsupportedEdgeWeightType(String),
    #[error("unsupported problem type {0:?}")]
    UnsupportedType(String),
    #[error("missing {0}")]
    Missing(&'static str),
    #[error("dimension mismatch in {section}: expected {expected} entries, found {found}")]
    DimensionMismatch {
        section: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("invalid instance: {0}")]
    Invalid(#[from] RoutingError),
    #[error("io error: {0}")]
    Io(String),
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Header,
    Coords,
    Demands,
    Depots,
}

fn malformed(line: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Malformed { line, msg: msg.into() }
}

fn node_id(tok: &str, line: usize, dim: usize) -> Result<usize, ParseError> {
    let id: usize = tok
        .parse()
        .map_err(|_| malformed(line, format!("bad node id {tok:?}")))?;
    if id == 0 || id > dim {
        return Err(malformed(line, format!("node id {id} outside 1..={dim}")));
    }
    Ok(id - 1)
}

fn number(tok: Option<&str>, line: usize) -> Result<f64, ParseError> {
    let tok = tok.ok_or_else(|| malformed(line, "missing value"))?;
    tok.parse().map_err(|_| malformed(line, format!("bad number {tok:?}")))
}

pub fn parse_tsplib_str(text: &str) -> Result<RoutingInstance, ParseError> {
    let mut name = String::new();
    let mut kind: Option<String> = None;
    let mut dim: Option<usize> = None;
    let mut ewt: Option<String> = None;
    let mut capacity: Option<f64> = None;
    let mut coords: Vec<Option<[f64; 2]>> = Vec::new();
    let mut demands: Vec<Option<f64>> = Vec::new();
    let mut depots: Vec<usize> = Vec::new();
    let (mut seen_coords, mut seen_demands, mut seen_depots) = (false, false, false);
    let (mut n_coords, mut n_demands) = (0usize, 0usize);
    let mut section = Section::Header;

    let need_dim = |dim: Option<usize>, line: usize| dim.ok_or_else(|| malformed(line, "section before DIMENSION"));

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        match line {
            "NODE_COORD_SECTION" => {
                let d = need_dim(dim, line_no)?;
                coords = vec![None; d];
                seen_coords = true;
                section = Section::Coords;
                continue;
            }
            "DEMAND_SECTION" => {
                let d = need_dim(dim, line_no)?;
                demands = vec![None; d];
                seen_demands = true;
                section = Section::Demands;
                continue;
            }
            "DEPOT_SECTION" => {
                seen_depots = true;
                section = Section::Depots;
                continue;
            }
            _ => {}
        }
        if let Some((key, value)) = line.split_once(':') {
            if section != Section::Header && key.trim().chars().all(|c| c.is_ascii_uppercase() || c == '_') {
                section = Section::Header;
            }
            if section == Section::Header {
                let value = value.trim();
                match key.trim() {
                    "NAME" => name = value.to_string(),
                    "TYPE" => kind = Some(value.to_string()),
                    "DIMENSION" => {
                        dim = Some(
                            value
                                .parse()
                                .map_err(|_| malformed(line_no, format!("bad DIMENSION {value:?}")))?,
                        )
                    }
                    "EDGE_WEIGHT_TYPE" => ewt = Some(value.to_string()),
                    "CAPACITY" => capacity = Some(number(Some(value), line_no)?),
                    _ => {}
                }
                continue;
            }
        }
        let mut toks = line.split_whitespace();
        match section {
            Section::Header => {
                // Header keys without a colon ("NAME foo") are tolerated.
                continue;
            }
            Section::Coords => {
                let d = need_dim(dim, line_no)?;
                let id = node_id(toks.next().unwrap_or(""), line_no, d)?;
                let x = number(toks.next(), line_no)?;
                let y = number(toks.next(), line_no)?;
                if coords[id].replace([x, y]).is_some() {
                    return Err(malformed(line_no, format!("duplicate node {}", id + 1)));
                }
                n_coords += 1;
            }
            Section::Demands => {
                let d = need_dim(dim, line_no)?;
                let id = node_id(toks.next().unwrap_or(""), line_no, d)?;
                let q = number(toks.next(), line_no)?;
                if demands[id].replace(q).is_some() {
                    return Err(malformed(line_no, format!("duplicate demand for node {}", id + 1)));
                }
                n_demands += 1;
            }
            Section::Depots => {
                for tok in toks {
                    if tok == "-1" {
                        section = Section::Header;
                        break;
                    }
                    let d = need_dim(dim, line_no)?;
                    depots.push(node_id(tok, line_no, d)?);
                }
            }
        }
    }

    let kind = kind.ok_or(ParseError::Missing("TYPE"))?;
    let dim = dim.ok_or(ParseError::Missing("DIMENSION"))?;
    match ewt.as_deref() {
        Some("EUC_2D") => {}
        Some(other) => return Err(ParseError::UnsupportedEdgeWeightType(other.to_string())),
        None => return Err(ParseError::Missing("EDGE_WEIGHT_TYPE")),
    }
    if !seen_coords {
        return Err(ParseError::Missing("NODE_COORD_SECTION"));
    }
    if n_coords != dim {
        return Err(ParseError::DimensionMismatch {
            section: "NODE_COORD_SECTION",
            expected: dim,
            found: n_coords,
        });
    }
    let coords: Vec<[f64; 2]> = coords.into_iter().map(|c| c.expect("counted")).collect();
    let (problem, depot) = match kind.as_str() {
        "TSP" => (Problem::Tsp, 0),
        "CVRP" => {
            let capacity = capacity.ok_or(ParseError::Missing("CAPACITY"))?;
            if !seen_demands {
                return Err(ParseError::Missing("DEMAND_SECTION"));
            }
            if n_demands != dim {
                return Err(ParseError::DimensionMismatch {
                    section: "DEMAND_SECTION",
                    expected: dim,
                    found: n_demands,
                });
            }
            if !seen_depots {
                return Err(ParseError::Missing("DEPOT_SECTION"));
            }
            let depot = match depots.as_slice() {
                [d] => *d,
                [] => return Err(ParseError::Missing("depot in DEPOT_SECTION")),
                _ => {
                    return Err(ParseError::UnsupportedType("CVRP with several depots".into()));
                }
            };
            let demands = demands.into_iter().map(|d| d.expect("counted")).collect();
            (Problem::Cvrp { demands, capacity }, depot)
        }
        other => return Err(ParseError::UnsupportedType(other.to_string())),
    };
    Ok(RoutingInstance::new(name, coords, Metric::Euc2d, depot, problem)?)
}

pub fn parse_tsplib(path: impl AsRef<Path>) -> Result<RoutingInstance, ParseError> {
    let text = fs::read_to_string(path).map_err(|e| ParseError::Io(e.to_string()))?;
    parse_tsplib_str(&text)
}

/// Writes a TSP or CVRP instance in the supported subset. Other kinds have no
/// TSPLIB representation.
pub fn write_tsplib(inst: &RoutingInstance) -> Result<String, ParseError> {
    let n = inst.n();
    let type_name = match inst.problem() {
        Problem::Tsp => "TSP",
        Problem::Cvrp { .. } => "CVRP",
        _ => return Err(ParseError::UnsupportedType(inst.kind().to_string().to_uppercase())),
    };
    let mut s = String::new();
    let _ = writeln!(s, "NAME : {}", inst.name());
    let _ = writeln!(s, "TYPE : {type_name}");
    let _ = writeln!(s, "DIMENSION : {n}");
    let _ = writeln!(s, "EDGE_WEIGHT_TYPE : EUC_2D");
    if let Problem::Cvrp { capacity, .. } = inst.problem() {
        let _ = writeln!(s, "CAPACITY : {capacity}");
    }
    s.push_str("NODE_COORD_SECTION\n");
    for (i, c) in inst.coords().iter().enumerate() {
        let _ = writeln!(s, "{} {} {}", i + 1, c[0], c[1]);
    }
    if let Problem::Cvrp { demands, .. } = inst.problem() {
        s.push_str("DEMAND_SECTION\n");
        for (i, d) in demands.iter().enumerate() {
            let _ = writeln!(s, "{} {}", i + 1, d);
        }
        let _ = writeln!(s, "DEPOT_SECTION\n{}\n-1", inst.depot() + 1);
    }
    s.push_str("EOF\n");
    Ok(s)
}
