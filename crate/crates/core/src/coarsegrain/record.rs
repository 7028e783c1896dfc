//! Plain-text decomposition records, one role per line:
//!
//! ```text
//! decomposition N=7 q=2 k=1
//! B 0,0,1 0,1,0
//! Bprime
//! S1 ...
//! S2 ...
//! outer ...
//! hole 0 ...
//! annulus 0 ...
//! outer-annulus ...
//! ```

use std::fmt::Write;

use super::Decomposition;
use crate::lattice::{CoarseGrid, Region, Site, SiteSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
}

fn write_sites(out: &mut String, label: &str, set: &SiteSet) {
    out.push_str(label);
    for s in set.iter() {
        let _ = write!(out, " {},{},{}", s.x, s.y, s.z);
    }
    out.push('\n');
}

impl Decomposition {
    pub fn to_record(&self, grid: &CoarseGrid) -> String {
        let mut out = format!(
            "decomposition N={} q={} k={}\n",
            grid.fine().half_side(),
            grid.q(),
            self.k
        );
        write_sites(&mut out, "B", &self.b);
        write_sites(&mut out, "Bprime", &self.b_prime);
        write_sites(&mut out, "S1", &self.s1);
        write_sites(&mut out, "S2", &self.s2);
        write_sites(&mut out, "outer", &self.outer);
        for (j, h) in self.holes.iter().enumerate() {
            write_sites(&mut out, &format!("hole {j}"), h);
        }
        for (j, a) in self.hole_annuli.iter().enumerate() {
            write_sites(&mut out, &format!("annulus {j}"), a);
        }
        write_sites(&mut out, "outer-annulus", &self.outer_annulus);
        out
    }
}

fn parse_sites<'a>(region: Region, tokens: impl Iterator<Item = &'a str>, line: usize) -> Result<SiteSet, RecordError> {
    let err = |msg: String| RecordError::Syntax { line, msg };
    let mut set = SiteSet::empty(region);
    for tok in tokens {
        let c: Vec<i32> = tok
            .split(',')
            .map(|x| x.parse::<i32>().map_err(|e| err(format!("{tok}: {e}"))))
            .collect::<Result<_, _>>()?;
        if c.len() != 3 {
            return Err(err(format!("{tok}: expected three coordinates")));
        }
        set.insert(Site::new(c[0], c[1], c[2]))
            .map_err(|e| err(e.to_string()))?;
    }
    Ok(set)
}

/// Parses a record written by [`Decomposition::to_record`].
pub fn parse_record(text: &str) -> Result<(CoarseGrid, Decomposition), RecordError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(RecordError::Syntax {
        line: 1,
        msg: "empty record".into(),
    })?;
    let field = |key: &str| -> Result<i64, RecordError> {
        header
            .split_whitespace()
            .find_map(|t| t.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
            .ok_or(RecordError::Syntax {
                line: 1,
                msg: format!("missing {key}"),
            })?
            .parse()
            .map_err(|e| RecordError::Syntax {
                line: 1,
                msg: format!("{key}: {e}"),
            })
    };
    if !header.starts_with("decomposition") {
        return Err(RecordError::Syntax {
            line: 1,
            msg: "missing decomposition header".into(),
        });
    }
    let (n, q, k) = (field("N")?, field("q")?, field("k")?);
    let grid = Region::new(n)
        .and_then(|r| CoarseGrid::new(r, q as i32))
        .map_err(|e| RecordError::Syntax {
            line: 1,
            msg: e.to_string(),
        })?;
    let region = grid.coarse();
    let empty = SiteSet::empty(region);
    let mut d = Decomposition {
        k: k as i32,
        b: empty.clone(),
        b_prime: empty.clone(),
        s1: empty.clone(),
        s2: empty.clone(),
        holes: Vec::new(),
        outer: empty.clone(),
        hole_annuli: Vec::new(),
        outer_annulus: empty,
    };
    for (i, line) in lines {
        let lineno = i + 1;
        let mut tokens = line.split_whitespace();
        let Some(role) = tokens.next() else { continue };
        match role {
            "hole" | "annulus" => {
                let j: usize = tokens.next().and_then(|t| t.parse().ok()).ok_or(RecordError::Syntax {
                    line: lineno,
                    msg: "missing index".into(),
                })?;
                let set = parse_sites(region, tokens, lineno)?;
                let list = if role == "hole" {
                    &mut d.holes
                } else {
                    &mut d.hole_annuli
                };
                if j != list.len() {
                    return Err(RecordError::Syntax {
                        line: lineno,
                        msg: format!("{role} {j} out of order"),
                    });
                }
                list.push(set);
            }
            _ => {
                let set = parse_sites(region, tokens, lineno)?;
                match role {
                    "B" => d.b = set,
                    "Bprime" => d.b_prime = set,
                    "S1" => d.s1 = set,
                    "S2" => d.s2 = set,
                    "outer" => d.outer = set,
                    "outer-annulus" => d.outer_annulus = set,
                    other => {
                        return Err(RecordError::Syntax {
                            line: lineno,
                            msg: format!("unknown role {other}"),
                        })
                    }
                }
            }
        }
    }
    Ok((grid, d))
}
