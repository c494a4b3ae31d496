//! Line-oriented instance grammar.
//!
//! ```text
//! # comment
//! nodes 4
//! required 2 3 4
//! edge 1 2 1 1        # u v cost [time]
//! service 2 1
//! window 2 1 1
//! horizon 10
//! revenue 2 5
//! demand 2 1
//! budget 4
//! capacity 2
//! ```

use super::{Instance, InstanceBuilder, NodeId};
use crate::error::{Error, Result};

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (idx, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..idx],
                    column: line[..s].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(idx);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    out
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn arity(&self, min: usize, max: usize) -> Result<()> {
        let got = self.tokens.len() - 1;
        if got < min {
            return Err(Error::syntax(
                self.number,
                self.end_column,
                format!("`{}` expects at least {min} argument(s), found {got}", self.tokens[0].text),
            ));
        }
        if got > max {
            let t = &self.tokens[max + 1];
            return Err(Error::syntax(
                self.number,
                t.column,
                format!("unexpected token `{}`", t.text),
            ));
        }
        Ok(())
    }

    fn node(&self, idx: usize) -> Result<NodeId> {
        let t = &self.tokens[idx];
        t.text
            .parse::<NodeId>()
            .map_err(|_| Error::syntax(self.number, t.column, format!("expected node label, found `{}`", t.text)))
    }

    fn number(&self, idx: usize) -> Result<f64> {
        let t = &self.tokens[idx];
        match t.text.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(Error::syntax(self.number, t.column, format!("expected number, found `{}`", t.text))),
        }
    }
}

pub(super) fn parse_instance(text: &str) -> Result<Instance> {
    let mut node_count: Option<usize> = None;
    let mut builder = InstanceBuilder::default();

    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let tokens = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let line = Line {
            number: idx + 1,
            end_column: content.trim_end().chars().count() + 1,
            tokens,
        };
        let keyword = line.tokens[0].text;
        match keyword {
            "nodes" => {
                line.arity(1, 1)?;
                if node_count.is_some() {
                    return Err(Error::syntax(line.number, line.tokens[0].column, "duplicate `nodes` declaration"));
                }
                let n = line.node(1)?;
                node_count = Some(n);
            }
            "required" => {
                for i in 1..line.tokens.len() {
                    let node = line.node(i)?;
                    builder = builder.required([node]);
                }
            }
            "edge" => {
                line.arity(3, 4)?;
                let (u, v, c) = (line.node(1)?, line.node(2)?, line.number(3)?);
                if c < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "negative weight on edge {{{u},{v}}} (line {})",
                        line.number
                    )));
                }
                builder = if line.tokens.len() == 5 {
                    let t = line.number(4)?;
                    if t < 0.0 {
                        return Err(Error::InvalidInstance(format!(
                            "negative weight: time on edge {{{u},{v}}} (line {})",
                            line.number
                        )));
                    }
                    builder.timed_edge(u, v, c, t)
                } else {
                    builder.edge(u, v, c)
                };
            }
            "service" => {
                line.arity(2, 2)?;
                builder = builder.service(line.node(1)?, line.number(2)?);
            }
            "window" => {
                line.arity(3, 3)?;
                builder = builder.window(line.node(1)?, line.number(2)?, line.number(3)?);
            }
            "horizon" => {
                line.arity(1, 1)?;
                builder = builder.horizon(line.number(1)?);
            }
            "revenue" => {
                line.arity(2, 2)?;
                builder = builder.revenue(line.node(1)?, line.number(2)?);
            }
            "demand" => {
                line.arity(2, 2)?;
                builder = builder.demand(line.node(1)?, line.number(2)?);
            }
            "budget" => {
                line.arity(1, 1)?;
                builder = builder.budget(line.number(1)?);
            }
            "capacity" => {
                line.arity(1, 1)?;
                builder = builder.capacity(line.number(1)?);
            }
            other => {
                return Err(Error::syntax(
                    line.number,
                    line.tokens[0].column,
                    format!("unknown keyword `{other}`"),
                ));
            }
        }
    }

    let n = node_count.ok_or_else(|| Error::syntax(1, 1, "missing `nodes` declaration"))?;
    builder.node_count = n;
    builder.build()
}
