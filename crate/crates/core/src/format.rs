//! Text formats for structures, families and sentence lists.
//!
//! Structure files:
//!
//! ```text
//! universe a b
//! relation R 1
//! + : (a)
//! - :
//! 0 : (b)
//! constant c = a
//! constant d = ?
//! function f 1
//! + : (a,a) (b,a)
//! - : (a,b) (b,b)
//! 0 :
//! ```
//!
//! The arity after `relation` is optional when some tuple is listed; omitted
//! triple lines mean an empty part. Family manifests list `index x = path`
//! lines (paths relative to the manifest) and optional `filter F = {x,y} {y}`
//! and `ultrafilter principal x` lines. `#` starts a comment everywhere.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::structures::{
    relation_from_triple, PartialFunctionTable, PartialRelation, PartialStructure, Tuple, Universe,
    Verdict,
};
use crate::syntax::{parse_sentence, Formula, ParseError, Signature};

/// A problem in a text file, with its 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, paired with line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

#[derive(Debug)]
enum Block {
    Relation,
    Function,
}

#[derive(Debug)]
struct PendingTable {
    kind: Block,
    name: String,
    declared_arity: Option<usize>,
    line: usize,
    parts: [Option<Vec<Vec<String>>>; 3],
}

fn parse_tuples(line: usize, text: &str) -> Result<Vec<Vec<String>>, FormatError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let inner_start = rest
            .strip_prefix('(')
            .ok_or_else(|| err(line, format!("expected `(` at `{rest}`")))?;
        let close = inner_start
            .find(')')
            .ok_or_else(|| err(line, "unclosed tuple"))?;
        let inner = &inner_start[..close];
        let elems: Vec<String> = inner.split(',').map(|e| e.trim().to_string()).collect();
        if elems.iter().any(String::is_empty) {
            return Err(err(line, format!("empty element in `({inner})`")));
        }
        out.push(elems);
        rest = inner_start[close + 1..].trim_start();
    }
    Ok(out)
}

fn finish_table(
    universe: &Universe,
    t: PendingTable,
    s: &mut PartialStructure,
) -> Result<(), FormatError> {
    let line = t.line;
    let listed_arity = t.parts.iter().flatten().flatten().map(Vec::len).next();
    let arity = match (t.declared_arity, listed_arity) {
        (Some(d), _) => d,
        (None, Some(a)) => a,
        (None, None) => {
            return Err(err(line, format!("cannot infer the arity of `{}`", t.name)));
        }
    };
    let arity = match t.kind {
        Block::Relation => arity,
        Block::Function => arity + 1,
    };
    let mut sets: [BTreeSet<Tuple>; 3] = Default::default();
    for (k, part) in t.parts.iter().enumerate() {
        for names in part.iter().flatten() {
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            if refs.len() != arity {
                return Err(err(
                    line,
                    format!(
                        "`{}` expects {arity}-tuples, found ({})",
                        t.name,
                        refs.join(",")
                    ),
                ));
            }
            sets[k].insert(
                universe
                    .tuple_by_names(&refs)
                    .map_err(|e| err(line, e.to_string()))?,
            );
        }
    }
    let [pos, neg, unk] = sets;
    let rel = relation_from_triple(universe, arity, &pos, &neg, &unk)
        .map_err(|e| err(line, format!("`{}`: {e}", t.name)))?;
    match t.kind {
        Block::Relation => s.add_relation(t.name, rel),
        Block::Function => PartialFunctionTable::new(rel).and_then(|f| s.add_function(t.name, f)),
    }
    .map_err(|e| err(line, e.to_string()))
}

/// Reads a structure file.
pub fn parse_structure(text: &str) -> Result<PartialStructure, FormatError> {
    let mut lines = content_lines(text);
    let (first, header) = lines.next().ok_or_else(|| err(1, "empty structure file"))?;
    let names = header
        .strip_prefix("universe")
        .filter(|r| r.is_empty() || r.starts_with(char::is_whitespace))
        .ok_or_else(|| err(first, "expected `universe` line first"))?;
    let universe =
        Universe::new(names.split_whitespace()).map_err(|e| err(first, e.to_string()))?;
    let mut s = PartialStructure::new(universe.clone());
    let mut pending: Option<PendingTable> = None;
    for (n, l) in lines {
        let marker = ["+", "-", "0"].iter().position(|m| {
            l.strip_prefix(m)
                .is_some_and(|r| r.trim_start().starts_with(':'))
        });
        if let Some(k) = marker {
            let table = pending
                .as_mut()
                .ok_or_else(|| err(n, "triple line outside a relation or function"))?;
            if table.parts[k].is_some() {
                return Err(err(
                    n,
                    format!(
                        "second `{}` line for `{}`",
                        Verdict::ALL[k].marker(),
                        table.name
                    ),
                ));
            }
            let body = l[1..].trim_start()[1..].trim();
            table.parts[k] = Some(parse_tuples(n, body)?);
            continue;
        }
        if let Some(t) = pending.take() {
            finish_table(&universe, t, &mut s)?;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.as_slice() {
            ["relation", name] | ["relation", name, _] | ["function", name, _] => {
                let declared_arity = match words.get(2) {
                    Some(a) => Some(
                        a.parse::<usize>()
                            .map_err(|_| err(n, format!("bad arity `{a}`")))?,
                    ),
                    None => None,
                };
                pending = Some(PendingTable {
                    kind: if words[0] == "relation" {
                        Block::Relation
                    } else {
                        Block::Function
                    },
                    name: name.to_string(),
                    declared_arity,
                    line: n,
                    parts: Default::default(),
                });
            }
            ["constant", name, "=", value] => {
                let v = if *value == "?" {
                    None
                } else {
                    Some(
                        universe
                            .position(value)
                            .ok_or_else(|| err(n, format!("unknown element `{value}`")))?,
                    )
                };
                s.add_constant(*name, v)
                    .map_err(|e| err(n, e.to_string()))?;
            }
            ["universe", ..] => return Err(err(n, "second `universe` line")),
            _ => return Err(err(n, format!("unrecognized line `{l}`"))),
        }
    }
    if let Some(t) = pending.take() {
        finish_table(&universe, t, &mut s)?;
    }
    Ok(s)
}

fn write_triple(out: &mut String, u: &Universe, r: &PartialRelation) {
    for v in Verdict::ALL {
        let tuples: Vec<String> = r.part(v).iter().map(|t| u.show_tuple(t)).collect();
        let sep = if tuples.is_empty() { "" } else { " " };
        let _ = writeln!(out, "{} :{sep}{}", v.marker(), tuples.join(" "));
    }
}

/// Writes a structure in the canonical form read by [`parse_structure`]:
/// every triple line present, tuples in lexicographic order.
pub fn write_structure(s: &PartialStructure) -> String {
    let u = s.universe();
    let mut out = format!("universe {}\n", u.names().join(" "));
    for (name, r) in s.relations() {
        let _ = writeln!(out, "relation {name} {}", r.arity());
        write_triple(&mut out, u, r);
    }
    for (name, f) in s.functions() {
        let _ = writeln!(out, "function {name} {}", f.arity());
        write_triple(&mut out, u, f.graph());
    }
    for (name, c) in s.constants() {
        let v = c.map_or("?", |a| u.name(a));
        let _ = writeln!(out, "constant {name} = {v}");
    }
    out
}

/// A filter line of a manifest: its name and braced subsets of index names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterSpec {
    pub name: String,
    pub members: Vec<Vec<String>>,
}

/// A parsed family manifest. Paths are as written in the file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub members: Vec<(String, String)>,
    pub filters: Vec<FilterSpec>,
    pub principal: Option<String>,
}

fn parse_braced(line: usize, text: &str) -> Result<Vec<Vec<String>>, FormatError> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let inner = rest
            .strip_prefix('{')
            .ok_or_else(|| err(line, format!("expected `{{` at `{rest}`")))?;
        let close = inner.find('}').ok_or_else(|| err(line, "unclosed `{`"))?;
        let names: Vec<String> = inner[..close]
            .split(',')
            .map(|x| x.trim().to_string())
            .filter(|x| !x.is_empty())
            .collect();
        out.push(names);
        rest = inner[close + 1..].trim_start();
    }
    Ok(out)
}

/// Reads a family manifest.
pub fn parse_manifest(text: &str) -> Result<Manifest, FormatError> {
    let mut m = Manifest::default();
    for (n, l) in content_lines(text) {
        if let Some(rest) = l.strip_prefix("filter ") {
            let (name, body) = rest
                .split_once('=')
                .ok_or_else(|| err(n, "expected `filter NAME = {..} ..`"))?;
            let name = name.trim().to_string();
            if m.filters.iter().any(|f| f.name == name) {
                return Err(err(n, format!("filter `{name}` defined twice")));
            }
            m.filters.push(FilterSpec {
                name,
                members: parse_braced(n, body)?,
            });
            continue;
        }
        let words: Vec<&str> = l.split_whitespace().collect();
        match words.as_slice() {
            ["index", name, "=", path] => m.members.push((name.to_string(), path.to_string())),
            ["ultrafilter", "principal", i0] => {
                if m.principal.replace(i0.to_string()).is_some() {
                    return Err(err(n, "second `ultrafilter` line"));
                }
            }
            _ => return Err(err(n, format!("unrecognized line `{l}`"))),
        }
    }
    if m.members.is_empty() {
        return Err(err(1, "manifest lists no `index` lines"));
    }
    Ok(m)
}

/// Renders a manifest in the form read by [`parse_manifest`].
pub fn write_manifest(m: &Manifest) -> String {
    let mut out = String::new();
    for (name, path) in &m.members {
        let _ = writeln!(out, "index {name} = {path}");
    }
    for f in &m.filters {
        let groups: Vec<String> = f
            .members
            .iter()
            .map(|g| format!("{{{}}}", g.join(",")))
            .collect();
        let _ = writeln!(out, "filter {} = {}", f.name, groups.join(" "));
    }
    if let Some(p) = &m.principal {
        let _ = writeln!(out, "ultrafilter principal {p}");
    }
    out
}

/// One sentence per non-empty line, each parsed against `sig`.
pub fn parse_sentences(text: &str, sig: &Signature) -> Result<Vec<Formula>, FormatError> {
    sentence_lines(text)
        .map(|(n, l)| parse_sentence(l, sig).map_err(|e| err(n, e.to_string())))
        .collect()
}

/// The non-empty, comment-free lines of a sentence file.
pub fn sentence_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    content_lines(text)
}

/// Position of `e` reported against the line it came from.
pub fn located(line: usize, e: ParseError) -> FormatError {
    err(line, e.to_string())
}

/// Reads a signature written `R/1, S/2; f/1, c/0`.
pub fn parse_signature(text: &str) -> Result<Signature, FormatError> {
    let (rels, funs) = text.split_once(';').unwrap_or((text, ""));
    let mut sig = Signature::new();
    let entries = |part: &str| -> Result<BTreeMap<String, usize>, FormatError> {
        part.split(',')
            .map(str::trim)
            .filter(|e| !e.is_empty())
            .map(|e| {
                let (name, arity) = e
                    .split_once('/')
                    .ok_or_else(|| err(1, format!("expected NAME/ARITY, found `{e}`")))?;
                let arity = arity
                    .trim()
                    .parse()
                    .map_err(|_| err(1, format!("bad arity in `{e}`")))?;
                Ok((name.trim().to_string(), arity))
            })
            .collect()
    };
    for (name, arity) in entries(rels)? {
        sig.add_relation(name, arity)
            .map_err(|e| err(1, e.to_string()))?;
    }
    for (name, arity) in entries(funs)? {
        sig.add_function(name, arity)
            .map_err(|e| err(1, e.to_string()))?;
    }
    Ok(sig)
}
