//! Directory format for heterogeneous graphs.
//!
//! ```text
//! schema            type <name> <count> | target <name> | relation <name> <src> <dst>
//! <relation>.edges  one "src_id dst_id" pair per line
//! <type>.feat       "<rows> <cols>" header, then one row of decimals per line (optional)
//! labels            "node_id class_id" per line, target type only
//! train.ids         one target node id per line (same for valid.ids, test.ids; optional)
//! provenance        "<type> <id> kept <orig>" or "<type> <id> hyper <orig>..." (optional)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, HeteroGraph, NodeType, Origin, Provenance, Relation, Splits};
use crate::sparse::SparseAdjacency;

pub const SCHEMA_FILE: &str = "schema";
pub const LABELS_FILE: &str = "labels";
pub const PROVENANCE_FILE: &str = "provenance";

pub fn edge_file(relation: &str) -> String {
    format!("{relation}.edges")
}

pub fn feature_file(ty: &str) -> String {
    format!("{ty}.feat")
}

fn split_file(split: &str) -> String {
    format!("{split}.ids")
}

/// Non-comment lines of a text file, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(file: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(file: &Path, line: usize, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(file, line, format!("cannot parse `{tok}`")))
}

struct Schema {
    types: Vec<NodeType>,
    target: String,
    relations: Vec<(String, String, String)>,
}

fn parse_schema(path: &Path) -> Result<Schema> {
    if !path.exists() {
        return Err(Error::MissingInput(format!(
            "schema file {}",
            path.display()
        )));
    }
    let text = read(path)?;
    let mut types = Vec::new();
    let mut target = None;
    let mut relations = Vec::new();
    for (ln, line) in content_lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["type", name, count] => types.push(NodeType {
                name: name.to_string(),
                count: parse_num(path, ln, count)?,
            }),
            ["target", name] => {
                if target.replace(name.to_string()).is_some() {
                    return Err(parse_err(path, ln, "more than one target declaration"));
                }
            }
            ["relation", name, src, dst] => {
                relations.push((name.to_string(), src.to_string(), dst.to_string()))
            }
            _ => {
                return Err(parse_err(
                    path,
                    ln,
                    format!("unrecognized schema line `{line}`"),
                ))
            }
        }
    }
    let target = target.ok_or_else(|| parse_err(path, 0, "no `target` declaration"))?;
    Ok(Schema {
        types,
        target,
        relations,
    })
}

fn count_of(schema: &Schema, ty: &str, path: &Path) -> Result<usize> {
    schema
        .types
        .iter()
        .find(|t| t.name == ty)
        .map(|t| t.count)
        .ok_or_else(|| parse_err(path, 0, format!("undeclared node type `{ty}`")))
}

fn load_edges(
    dir: &Path,
    name: &str,
    src: (&str, usize),
    dst: (&str, usize),
) -> Result<SparseAdjacency> {
    let path = dir.join(edge_file(name));
    if !path.exists() {
        return Err(Error::MissingInput(format!(
            "edge file for relation {name} ({})",
            path.display()
        )));
    }
    let text = read(&path)?;
    let mut pairs = Vec::new();
    for (ln, line) in content_lines(&text) {
        let mut toks = line.split_whitespace();
        let (Some(a), Some(b), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(parse_err(
                &path,
                ln,
                format!("relation {name}: expected `src dst`"),
            ));
        };
        let s: usize = parse_num(&path, ln, a)?;
        let d: usize = parse_num(&path, ln, b)?;
        for (id, (ty, n)) in [(s, src), (d, dst)] {
            if id >= n {
                return Err(parse_err(
                    &path,
                    ln,
                    format!("relation {name}: node id {id} out of range for type {ty} ({n} nodes)"),
                ));
            }
        }
        pairs.push((s, d));
    }
    SparseAdjacency::from_pairs(src.1, dst.1, &pairs)
}

fn load_features(path: &Path) -> Result<FeatureMatrix> {
    let text = read(path)?;
    let mut lines = content_lines(&text);
    let (hl, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing `<rows> <cols>` header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    let [rows, cols] = dims.as_slice() else {
        return Err(parse_err(path, hl, "header must be `<rows> <cols>`"));
    };
    let rows: usize = parse_num(path, hl, rows)?;
    let cols: usize = parse_num(path, hl, cols)?;
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0usize;
    for (ln, line) in lines {
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_num::<f64>(path, ln, tok)?);
        }
        if data.len() - before != cols {
            return Err(parse_err(
                path,
                ln,
                format!("expected {cols} values, found {}", data.len() - before),
            ));
        }
        seen += 1;
    }
    if seen != rows {
        return Err(parse_err(
            path,
            hl,
            format!("header declares {rows} rows, file has {seen}"),
        ));
    }
    FeatureMatrix::new(rows, cols, data)
}

fn load_ids(path: &Path) -> Result<Vec<usize>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = read(path)?;
    content_lines(&text)
        .map(|(ln, line)| parse_num(path, ln, line))
        .collect()
}

fn load_provenance(path: &Path) -> Result<Option<Provenance>> {
    if !path.exists() {
        return Ok(None);
    }
    let text = read(path)?;
    let mut prov: Provenance = BTreeMap::new();
    for (ln, line) in content_lines(&text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 4 {
            return Err(parse_err(
                path,
                ln,
                "expected `<type> <id> kept|hyper <ids>`",
            ));
        }
        let id: usize = parse_num(path, ln, toks[1])?;
        let entries = prov.entry(toks[0].to_string()).or_default();
        if id != entries.len() {
            return Err(parse_err(
                path,
                ln,
                format!("expected id {}, found {id}", entries.len()),
            ));
        }
        let ids = toks[3..]
            .iter()
            .map(|t| parse_num(path, ln, t))
            .collect::<Result<Vec<usize>>>()?;
        let origin = match (toks[2], ids.as_slice()) {
            ("kept", [one]) => Origin::Kept(*one),
            ("hyper", _) => Origin::Hyper(ids),
            _ => return Err(parse_err(path, ln, format!("bad origin `{}`", toks[2]))),
        };
        entries.push(origin);
    }
    Ok(Some(prov))
}

/// Loads and validates a graph directory.
pub fn load_graph(dir: impl AsRef<Path>) -> Result<HeteroGraph> {
    let dir = dir.as_ref();
    let schema_path = dir.join(SCHEMA_FILE);
    let schema = parse_schema(&schema_path)?;

    let mut relations = Vec::with_capacity(schema.relations.len());
    for (name, src, dst) in &schema.relations {
        let n_src = count_of(&schema, src, &schema_path)?;
        let n_dst = count_of(&schema, dst, &schema_path)?;
        let adjacency = load_edges(dir, name, (src, n_src), (dst, n_dst))?;
        relations.push(Relation {
            name: name.clone(),
            src_type: src.clone(),
            dst_type: dst.clone(),
            adjacency,
        });
    }

    let mut features = BTreeMap::new();
    for t in &schema.types {
        let path = dir.join(feature_file(&t.name));
        if path.exists() {
            features.insert(t.name.clone(), load_features(&path)?);
        }
    }

    let n_target = count_of(&schema, &schema.target, &schema_path)?;
    let labels_path = dir.join(LABELS_FILE);
    if !labels_path.exists() {
        return Err(Error::MissingInput(format!(
            "label file {}",
            labels_path.display()
        )));
    }
    let mut labels = vec![None; n_target];
    for (ln, line) in content_lines(&read(&labels_path)?) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let [node, class] = toks.as_slice() else {
            return Err(parse_err(&labels_path, ln, "expected `node_id class_id`"));
        };
        let node: usize = parse_num(&labels_path, ln, node)?;
        let class: u32 = parse_num(&labels_path, ln, class)?;
        let slot = labels.get_mut(node).ok_or_else(|| {
            parse_err(
                &labels_path,
                ln,
                format!("node {node} out of range ({n_target} target nodes)"),
            )
        })?;
        *slot = Some(class);
    }

    let splits = Splits {
        train: load_ids(&dir.join(split_file("train")))?,
        valid: load_ids(&dir.join(split_file("valid")))?,
        test: load_ids(&dir.join(split_file("test")))?,
    };

    let graph = HeteroGraph {
        node_types: schema.types,
        relations,
        features,
        labels,
        splits,
        target_type: schema.target,
        provenance: load_provenance(&dir.join(PROVENANCE_FILE))?,
    };
    graph.validate().into_result()?;
    Ok(graph)
}

struct Out {
    path: PathBuf,
    w: BufWriter<fs::File>,
}

impl Out {
    fn create(path: PathBuf) -> Result<Self> {
        let f = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Out {
            w: BufWriter::new(f),
            path,
        })
    }

    fn line(&mut self, args: std::fmt::Arguments<'_>) -> Result<()> {
        self.w
            .write_fmt(args)
            .and_then(|_| self.w.write_all(b"\n"))
            .map_err(|e| Error::io(&self.path, e))
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn join_floats(values: &[f64]) -> String {
    let mut s = String::new();
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        // `Display` for f64 prints the shortest string that parses back exactly.
        s.push_str(&v.to_string());
    }
    s
}

/// Writes `graph` into `dir` (created if absent).
pub fn save_graph(graph: &HeteroGraph, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut schema = Out::create(dir.join(SCHEMA_FILE))?;
    for t in &graph.node_types {
        schema.line(format_args!("type {} {}", t.name, t.count))?;
    }
    schema.line(format_args!("target {}", graph.target_type))?;
    for r in &graph.relations {
        schema.line(format_args!(
            "relation {} {} {}",
            r.name, r.src_type, r.dst_type
        ))?;
    }
    schema.finish()?;

    for r in &graph.relations {
        let mut out = Out::create(dir.join(edge_file(&r.name)))?;
        for (s, d) in r.adjacency.pairs() {
            out.line(format_args!("{s} {d}"))?;
        }
        out.finish()?;
    }

    for (ty, feats) in &graph.features {
        let mut out = Out::create(dir.join(feature_file(ty)))?;
        out.line(format_args!("{} {}", feats.n_rows(), feats.n_cols()))?;
        for r in 0..feats.n_rows() {
            out.line(format_args!("{}", join_floats(feats.row(r))))?;
        }
        out.finish()?;
    }

    let mut labels = Out::create(dir.join(LABELS_FILE))?;
    for (v, c) in graph.labels.iter().enumerate() {
        if let Some(c) = c {
            labels.line(format_args!("{v} {c}"))?;
        }
    }
    labels.finish()?;

    for (name, ids) in [
        ("train", &graph.splits.train),
        ("valid", &graph.splits.valid),
        ("test", &graph.splits.test),
    ] {
        let mut out = Out::create(dir.join(split_file(name)))?;
        for id in ids {
            out.line(format_args!("{id}"))?;
        }
        out.finish()?;
    }

    if let Some(prov) = &graph.provenance {
        let mut out = Out::create(dir.join(PROVENANCE_FILE))?;
        for (ty, origins) in prov {
            for (id, origin) in origins.iter().enumerate() {
                match origin {
                    Origin::Kept(o) => out.line(format_args!("{ty} {id} kept {o}"))?,
                    Origin::Hyper(ms) => {
                        let ms: Vec<String> = ms.iter().map(|m| m.to_string()).collect();
                        out.line(format_args!("{ty} {id} hyper {}", ms.join(" ")))?
                    }
                }
            }
        }
        out.finish()?;
    }
    Ok(())
}
