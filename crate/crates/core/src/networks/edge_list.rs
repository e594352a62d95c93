//! Plain-text edge lists.
//!
//! ```text
//! # generator=dms seed=7 Z=1000 m=2
//! 0 1
//! 0 2
//! ...
//! ```
//!
//! One `u v` pair per line with `u < v`, in ascending lexicographic order.
//! Further `#` lines are ignored on load.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use super::{GeneratorTag, Graph, NodeId, Provenance};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> io::Result<()> {
    let p = g.provenance();
    writeln!(
        out,
        "# generator={} seed={} Z={} m={}",
        p.generator, p.seed, p.nodes, p.m
    )?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()
}

pub fn save_edge_list(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = fs::File::create(path).map_err(io_err)?;
    write_edge_list(g, BufWriter::new(file)).map_err(io_err)
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(&text).map_err(|e| match e {
        Error::Parse { line, message, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            line,
            message,
        },
        other => other,
    })
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: None,
        line,
        message: message.into(),
    }
}

fn parse_header(line_no: usize, body: &str) -> Result<Provenance> {
    let mut generator = None;
    let mut seed = None;
    let mut nodes = None;
    let mut m = None;
    for token in body.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| parse_error(line_no, format!("expected key=value, got `{token}`")))?;
        let bad = |what: &str| parse_error(line_no, format!("invalid {what} `{value}`"));
        match key {
            "generator" => {
                generator = Some(value.parse::<GeneratorTag>().map_err(|_| bad("generator"))?)
            }
            "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
            "Z" => nodes = Some(value.parse::<usize>().map_err(|_| bad("node count"))?),
            "m" => m = Some(value.parse::<usize>().map_err(|_| bad("m"))?),
            other => return Err(parse_error(line_no, format!("unknown header key `{other}`"))),
        }
    }
    let missing = |key: &str| parse_error(line_no, format!("header is missing `{key}`"));
    Ok(Provenance {
        generator: generator.ok_or_else(|| missing("generator"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        nodes: nodes.ok_or_else(|| missing("Z"))?,
        m: m.ok_or_else(|| missing("m"))?,
    })
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut provenance = None;
    let mut edges: Vec<(NodeId, NodeId)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(body) = line.strip_prefix('#') {
            if body.contains("generator=") {
                if provenance.is_some() {
                    return Err(parse_error(line_no, "duplicate provenance header"));
                }
                provenance = Some(parse_header(line_no, body)?);
            }
            continue;
        }
        if provenance.is_none() {
            return Err(parse_error(line_no, "edge before provenance header"));
        }
        let mut fields = line.split_whitespace();
        let mut node = || -> Result<NodeId> {
            let field = fields
                .next()
                .ok_or_else(|| parse_error(line_no, "expected two node ids"))?;
            field
                .parse::<NodeId>()
                .map_err(|_| parse_error(line_no, format!("invalid node id `{field}`")))
        };
        let (u, v) = (node()?, node()?);
        if fields.next().is_some() {
            return Err(parse_error(line_no, "trailing fields after edge"));
        }
        if u >= v {
            return Err(parse_error(line_no, format!("edge `{u} {v}` must satisfy u < v")));
        }
        edges.push((u, v));
    }
    let provenance = provenance.ok_or_else(|| parse_error(1, "missing provenance header"))?;
    Graph::from_edges(provenance, edges)
}
