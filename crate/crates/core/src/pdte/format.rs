//! File formats: text tree models, feature files and binary node arrays.
//!
//! Tree model file:
//!
//! ```text
//! pdte-tree 1
//! k 16
//! n 4
//! d_pad 6          # optional, defaults to the depth
//! # id t l r feature_id label
//! 0 10 1 2 0 0
//! 1 0 1 1 -1 7
//! 2 0 2 2 -1 9
//! ```
//!
//! Node 0 is the root. Leaves have `feature_id = -1`; their `t`, `l` and `r`
//! columns are ignored. Thresholds and features compare as k-bit unsigned
//! integers, so a signed feature has to be offset by `2^(k-1)` by the model
//! owner, thresholds included.
//!
//! Feature file: one query per line, `n` comma-separated unsigned integers.

use std::collections::HashMap;

use super::tree::{encode_tree, LogicalTree, TreeArray};
use crate::error::{Error, Result};
use crate::gf2::BitVec;

const TREE_MAGIC: &str = "pdte-tree";
const ARRAY_MAGIC: &[u8; 4] = b"PDTA";
const FORMAT_VERSION: u8 = 1;

fn fmt_err(what: &'static str, line: usize, msg: impl Into<String>) -> Error {
    Error::Format {
        what,
        line,
        msg: msg.into(),
    }
}

struct RawNode {
    line: usize,
    t: u64,
    l: u64,
    r: u64,
    feature: i64,
    label: u64,
}

/// Parses and encodes a tree model file. `d_pad` from the header, if any,
/// replaces the default.
pub fn parse_tree(text: &str) -> Result<TreeArray> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (ln, header) = lines
        .next()
        .ok_or_else(|| fmt_err("tree", 1, "empty file"))?;
    let mut hw = header.split_whitespace();
    if hw.next() != Some(TREE_MAGIC) || hw.next() != Some("1") || hw.next().is_some() {
        return Err(fmt_err("tree", ln, format!("expected `{TREE_MAGIC} 1`")));
    }
    let (mut k, mut n, mut d_pad) = (None, None, None);
    let mut raw: HashMap<u64, RawNode> = HashMap::new();
    for (ln, line) in lines {
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [key @ ("k" | "n" | "d_pad"), v] => {
                let v: usize = v
                    .parse()
                    .map_err(|_| fmt_err("tree", ln, format!("bad value for {key}")))?;
                match *key {
                    "k" => k = Some(v),
                    "n" => n = Some(v),
                    _ => d_pad = Some(v),
                }
            }
            [id, t, l, r, f, c] => {
                let num = |s: &str, name: &str| -> Result<u64> {
                    s.parse()
                        .map_err(|_| fmt_err("tree", ln, format!("bad {name} `{s}`")))
                };
                let id = num(id, "node id")?;
                let feature: i64 = f
                    .parse()
                    .map_err(|_| fmt_err("tree", ln, format!("node {id}: bad feature id `{f}`")))?;
                let node = RawNode {
                    line: ln,
                    t: num(t, "threshold")?,
                    l: num(l, "left child")?,
                    r: num(r, "right child")?,
                    feature,
                    label: num(c, "label")?,
                };
                if raw.insert(id, node).is_some() {
                    return Err(fmt_err("tree", ln, format!("node {id} defined twice")));
                }
            }
            _ => return Err(fmt_err("tree", ln, "expected `key value` or six node columns")),
        }
    }
    let k = k.ok_or_else(|| fmt_err("tree", 0, "missing `k`"))?;
    let n = n.ok_or_else(|| fmt_err("tree", 0, "missing `n`"))?;
    if k == 0 || k > 64 {
        return Err(fmt_err("tree", 0, format!("k = {k} is outside 1..=64")));
    }
    let kmask = if k == 64 { u64::MAX } else { (1 << k) - 1 };
    for (id, nd) in &raw {
        if nd.feature < -1 || (nd.feature >= 0 && nd.feature as usize >= n) {
            return Err(fmt_err(
                "tree",
                nd.line,
                format!("node {id}: feature id {} out of range for n = {n}", nd.feature),
            ));
        }
        if nd.label > kmask || (nd.feature >= 0 && nd.t > kmask) {
            return Err(fmt_err("tree", nd.line, format!("node {id}: value wider than {k} bits")));
        }
    }
    if !raw.contains_key(&0) {
        return Err(fmt_err("tree", 0, "no root node 0"));
    }

    // Rebuild the logical tree from the root, rejecting shared or cyclic children.
    let mut seen = vec![];
    let tree = build(0, &raw, &mut seen, 0)?;
    if seen.len() != raw.len() {
        let mut orphans: Vec<_> = raw.keys().filter(|id| !seen.contains(id)).collect();
        orphans.sort();
        return Err(fmt_err(
            "tree",
            raw[orphans[0]].line,
            format!("node {} is not reachable from the root", orphans[0]),
        ));
    }
    let mut arr = encode_tree(&tree, k, n)?;
    if let Some(d) = d_pad {
        if d < arr.depth {
            return Err(fmt_err(
                "tree",
                0,
                format!("d_pad {d} is below the tree depth {}", arr.depth),
            ));
        }
        arr.d_pad = d;
    }
    Ok(arr)
}

fn build(id: u64, raw: &HashMap<u64, RawNode>, seen: &mut Vec<u64>, parent_line: usize) -> Result<LogicalTree> {
    let nd = raw
        .get(&id)
        .ok_or_else(|| fmt_err("tree", parent_line, format!("child {id} is not defined")))?;
    if seen.contains(&id) {
        return Err(fmt_err("tree", nd.line, format!("node {id} has two parents or lies on a cycle")));
    }
    seen.push(id);
    if nd.feature < 0 {
        return Ok(LogicalTree::Leaf { label: nd.label });
    }
    Ok(LogicalTree::Split {
        feature: nd.feature as usize,
        threshold: nd.t,
        left: Box::new(build(nd.l, raw, seen, nd.line)?),
        right: Box::new(build(nd.r, raw, seen, nd.line)?),
    })
}

/// Writes an array in the text format; node ids are array positions.
pub fn write_tree(arr: &TreeArray) -> String {
    let mut out = format!(
        "{TREE_MAGIC} 1\nk {}\nn {}\nd_pad {}\n# id t l r feature_id label\n",
        arr.k, arr.n, arr.d_pad
    );
    for (j, nd) in arr.nodes.iter().enumerate() {
        let f = nd.feature.map_or(-1, |f| f as i64);
        out.push_str(&format!("{j} {} {} {} {f} {}\n", nd.t, nd.l, nd.r, nd.c));
    }
    out
}

/// One query per line, `n` values of at most `k` bits each.
pub fn parse_features(text: &str, n: usize, k: usize) -> Result<Vec<Vec<u64>>> {
    let kmask = if k >= 64 { u64::MAX } else { (1 << k) - 1 };
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Vec<u64> = line
            .split(',')
            .map(|v| v.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| fmt_err("features", i + 1, e.to_string()))?;
        if row.len() != n {
            return Err(fmt_err(
                "features",
                i + 1,
                format!("{} values, expected {n}", row.len()),
            ));
        }
        if let Some(v) = row.iter().find(|&&v| v > kmask) {
            return Err(fmt_err("features", i + 1, format!("{v} is wider than {k} bits")));
        }
        out.push(row);
    }
    Ok(out)
}

pub fn write_features(rows: &[Vec<u64>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n")
        .collect()
}

/// Binary node array: magic, version, k (u8), n, m, depth, d_pad (u32 LE),
/// then the packed nodes.
pub fn array_to_bytes(arr: &TreeArray) -> Vec<u8> {
    let mut out = ARRAY_MAGIC.to_vec();
    out.push(FORMAT_VERSION);
    out.push(arr.k as u8);
    for v in [arr.n, arr.m(), arr.depth, arr.d_pad] {
        out.extend((v as u32).to_le_bytes());
    }
    out.extend(arr.packed().to_bytes());
    out
}

pub fn array_from_bytes(b: &[u8]) -> Result<TreeArray> {
    let bad = |msg: &str| fmt_err("array", 0, msg);
    if b.len() < 22 || &b[..4] != ARRAY_MAGIC {
        return Err(bad("not a packed tree array"));
    }
    if b[4] != FORMAT_VERSION {
        return Err(bad("unsupported version"));
    }
    let k = b[5] as usize;
    let word = |i: usize| u32::from_le_bytes(b[6 + 4 * i..10 + 4 * i].try_into().unwrap()) as usize;
    let (n, m, depth, d_pad) = (word(0), word(1), word(2), word(3));
    let bits = m * (4 * k + n);
    let body = &b[22..];
    if body.len() != bits.div_ceil(8) {
        return Err(bad("length does not match the header"));
    }
    TreeArray::from_packed(&BitVec::from_bytes(body, bits), k, n, depth, d_pad)
}
