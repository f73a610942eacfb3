//! Line-oriented text format for networks.
//!
//! ```text
//! # comment lines and blank lines are ignored
//! nodes <N> dim <D> [metric euclid|sup|one]
//! <x> <y>            N coordinate lines, or the single line `none`
//! <i>: <j1> <j2> ... N adjacency lines, i = 0..N-1 in order
//! edges              optional section
//! <i> <j> <w>        one line per undirected edge
//! ```
//!
//! With coordinates and no `edges` section, edge lengths are the `metric`
//! distance of the endpoints (default `euclid`). Otherwise every adjacent pair
//! needs a length in the `edges` section. Coordinates must be 2-dimensional.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::network::{NetworkError, Network, NodeId, Norm, Point};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unexpected end of input: {0}")]
    Truncated(String),
    #[error("missing length for edge {0}-{1}")]
    MissingLength(NodeId, NodeId),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T, FormatError> {
    tok.parse().map_err(|_| syntax(line, format!("cannot parse `{tok}`")))
}

pub fn parse_network(text: &str) -> Result<Network, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| lines.next().ok_or_else(|| FormatError::Truncated(what.to_string()));

    let (ln, header) = next("header")?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() < 4 || toks[0] != "nodes" || toks[2] != "dim" {
        return Err(syntax(ln, "expected `nodes <N> dim <D>`"));
    }
    let len: usize = parse_num(toks[1], ln)?;
    let dim: usize = parse_num(toks[3], ln)?;
    let metric = match toks.get(4..) {
        Some([]) | None => Norm::Euclid,
        Some(["metric", m]) => m.parse().map_err(|e: String| syntax(ln, e))?,
        Some(_) => return Err(syntax(ln, "trailing tokens after header")),
    };

    let (ln, first) = next("coordinates")?;
    let coords = if first == "none" {
        None
    } else {
        if dim != 2 {
            return Err(syntax(ln, format!("only 2-dimensional coordinates are supported, got dim {dim}")));
        }
        let mut pts: Vec<Point> = Vec::with_capacity(len);
        let mut line = (ln, first);
        for i in 0..len {
            if i > 0 {
                line = next("coordinates")?;
            }
            let t: Vec<&str> = line.1.split_whitespace().collect();
            if t.len() != 2 {
                return Err(syntax(line.0, "expected two coordinates"));
            }
            pts.push([parse_num(t[0], line.0)?, parse_num(t[1], line.0)?]);
        }
        Some(pts)
    };

    let mut neighbors: Vec<Vec<NodeId>> = Vec::with_capacity(len);
    for i in 0..len {
        let (ln, l) = next("adjacency")?;
        let (head, rest) = l.split_once(':').ok_or_else(|| syntax(ln, "expected `i: j1 j2 ...`"))?;
        let id: usize = parse_num(head.trim(), ln)?;
        if id != i {
            return Err(syntax(ln, format!("adjacency lines must be in order, expected {i}, got {id}")));
        }
        neighbors.push(
            rest.split_whitespace()
                .map(|t| parse_num(t, ln))
                .collect::<Result<_, _>>()?,
        );
    }

    let mut lengths: Option<HashMap<(NodeId, NodeId), f64>> = None;
    if let Ok((ln, l)) = next("") {
        if l != "edges" {
            return Err(syntax(ln, "expected `edges` section or end of input"));
        }
        let mut map = HashMap::new();
        for (ln, l) in lines.by_ref() {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(syntax(ln, "expected `i j w`"));
            }
            let (a, b): (usize, usize) = (parse_num(t[0], ln)?, parse_num(t[1], ln)?);
            let w: f64 = parse_num(t[2], ln)?;
            map.insert((a.min(b), a.max(b)), w);
        }
        lengths = Some(map);
    }

    match (coords, lengths) {
        (Some(c), None) => Ok(Network::with_coords(c, metric, neighbors)?),
        (coords, Some(map)) => {
            let mut lists = Vec::with_capacity(len);
            for (x, ns) in neighbors.into_iter().enumerate() {
                let mut l = Vec::with_capacity(ns.len());
                for y in ns {
                    let w = *map.get(&(x.min(y), x.max(y))).ok_or(FormatError::MissingLength(x, y))?;
                    l.push((y, w));
                }
                lists.push(l);
            }
            let net = Network::from_adjacency(lists)?;
            Ok(match coords {
                Some(c) => net.attach_coords(c)?,
                None => net,
            })
        }
        (None, None) => Err(FormatError::Truncated(
            "networks without coordinates need an `edges` section".into(),
        )),
    }
}

/// Serializes a network. Networks with an ambient metric are written without an
/// `edges` section, since their lengths are recomputed from coordinates.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    let implicit = net.metric().filter(|_| net.coords().is_some());
    match implicit {
        Some(m) => writeln!(out, "nodes {} dim 2 metric {}", net.len(), m.name()).unwrap(),
        None => writeln!(out, "nodes {} dim {}", net.len(), if net.coords().is_some() { 2 } else { 0 }).unwrap(),
    }
    match net.coords() {
        Some(c) => c.iter().for_each(|p| writeln!(out, "{} {}", p[0], p[1]).unwrap()),
        None => out.push_str("none\n"),
    }
    for x in 0..net.len() {
        write!(out, "{x}:").unwrap();
        for e in net.neighbors(x) {
            write!(out, " {}", e.to).unwrap();
        }
        out.push('\n');
    }
    if implicit.is_none() {
        out.push_str("edges\n");
        for x in 0..net.len() {
            for e in net.neighbors(x).iter().filter(|e| e.to > x) {
                writeln!(out, "{} {} {}", x, e.to, e.length).unwrap();
            }
        }
    }
    out
}
