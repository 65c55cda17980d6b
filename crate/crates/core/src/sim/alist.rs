//! alist parity-check files and reliability masks.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sim::graph::TannerGraph;

/// Writes `graph` in alist format (1-indexed, no zero padding).
pub fn to_alist(graph: &TannerGraph) -> String {
    let var_lists: Vec<Vec<usize>> = (0..graph.n)
        .map(|v| {
            graph
                .vn_edges(v)
                .iter()
                .map(|&e| graph.edge_cn[e])
                .collect()
        })
        .collect();
    let chk_lists = graph.check_lists();
    let max_col = var_lists.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = chk_lists.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let join = |l: &[usize], shift: usize| {
        l.iter()
            .map(|x| (x + shift).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let _ = writeln!(out, "{} {}", graph.n, graph.m);
    let _ = writeln!(out, "{max_col} {max_row}");
    let _ = writeln!(
        out,
        "{}",
        join(&var_lists.iter().map(Vec::len).collect::<Vec<_>>(), 0)
    );
    let _ = writeln!(
        out,
        "{}",
        join(&chk_lists.iter().map(Vec::len).collect::<Vec<_>>(), 0)
    );
    for l in &var_lists {
        let _ = writeln!(out, "{}", join(l, 1));
    }
    for l in &chk_lists {
        let _ = writeln!(out, "{}", join(l, 1));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self) -> Result<Vec<usize>> {
        loop {
            let (i, raw) = self.inner.next().ok_or(Error::Alist {
                line: self.line + 1,
                msg: "unexpected end of file".into(),
            })?;
            self.line = i + 1;
            if raw.trim().is_empty() {
                continue;
            }
            return raw
                .split_whitespace()
                .map(|t| {
                    t.parse()
                        .map_err(|_| self.err(format!("`{t}` is not a non-negative integer")))
                })
                .collect();
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Alist {
            line: self.line,
            msg,
        }
    }
}

/// Parses an alist file. Zero entries in adjacency lines are padding. The
/// reliability mask defaults to all regular.
pub fn from_alist(text: &str, reliable: Option<Vec<bool>>) -> Result<TannerGraph> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let head = lines.next_numbers()?;
    let [n, m] = head[..] else {
        return Err(lines.err("expected `n m`".into()));
    };
    let _max = lines.next_numbers()?;
    let col = lines.next_numbers()?;
    if col.len() != n {
        return Err(lines.err(format!("{} column degrees for n = {n}", col.len())));
    }
    let row = lines.next_numbers()?;
    if row.len() != m {
        return Err(lines.err(format!("{} row degrees for m = {m}", row.len())));
    }
    let mut var_lists = Vec::with_capacity(n);
    for (v, &d) in col.iter().enumerate() {
        let l: Vec<usize> = lines
            .next_numbers()?
            .into_iter()
            .filter(|&x| x != 0)
            .collect();
        if l.len() != d || l.iter().any(|&c| c > m) {
            return Err(lines.err(format!("bad adjacency list for variable {}", v + 1)));
        }
        var_lists.push(l);
    }
    let mut checks = Vec::with_capacity(m);
    for (c, &d) in row.iter().enumerate() {
        let l: Vec<usize> = lines
            .next_numbers()?
            .into_iter()
            .filter(|&x| x != 0)
            .map(|x| x - 1)
            .collect();
        if l.len() != d || l.iter().any(|&v| v >= n) {
            return Err(lines.err(format!("bad adjacency list for check {}", c + 1)));
        }
        checks.push(l);
    }
    for (v, l) in var_lists.iter().enumerate() {
        for &c in l {
            if !checks[c - 1].contains(&v) {
                return Err(Error::Alist {
                    line: 0,
                    msg: format!("variable {} lists check {c} but not vice versa", v + 1),
                });
            }
        }
    }
    let reliable = reliable.unwrap_or_else(|| vec![false; n]);
    TannerGraph::from_check_lists(n, &checks, reliable)
}

/// One line of `n` space-separated 0/1 flags.
pub fn mask_to_string(mask: &[bool]) -> String {
    let mut s = mask
        .iter()
        .map(|&b| if b { "1" } else { "0" })
        .collect::<Vec<_>>()
        .join(" ");
    s.push('\n');
    s
}

pub fn mask_from_str(text: &str) -> Result<Vec<bool>> {
    text.split_whitespace()
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(Error::Alist {
                line: 1,
                msg: format!("mask entry `{other}` is not 0 or 1"),
            }),
        })
        .collect()
}
