use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Token color. Structured so that programs and models can ride on tokens.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    /// Nothing entered or written on this clock step.
    Empty,
    Black,
    Str(String),
    Int(i64),
    Bytes(Vec<u8>),
    Tuple(Vec<Color>),
}

impl Color {
    pub fn str(s: impl Into<String>) -> Self {
        Color::Str(s.into())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Color::Empty)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Color::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Debug for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Empty => f.write_str("empty"),
            Color::Black => f.write_str("black"),
            Color::Str(s) => write!(f, "{s:?}"),
            Color::Int(i) => write!(f, "{i}"),
            Color::Bytes(b) => write!(f, "0x{}", hex::encode(b)),
            Color::Tuple(items) => f.debug_tuple("").field(items).finish(),
        }
    }
}

/// Colors a state may hold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorSet {
    Finite(BTreeSet<Color>),
    /// Unbounded (program texts, models, messages).
    Any,
}

impl ColorSet {
    pub fn black() -> Self {
        ColorSet::Finite([Color::Black].into_iter().collect())
    }

    pub fn of(colors: impl IntoIterator<Item = Color>) -> Self {
        ColorSet::Finite(colors.into_iter().collect())
    }

    pub fn contains(&self, c: &Color) -> bool {
        match self {
            ColorSet::Finite(s) => s.contains(c),
            ColorSet::Any => true,
        }
    }

    pub fn finite(&self) -> Option<&BTreeSet<Color>> {
        match self {
            ColorSet::Finite(s) => Some(s),
            ColorSet::Any => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub input: Vec<Color>,
    pub output: Vec<Color>,
}

/// Per-event map from input colors to output colors. Partial functions
/// restrict firing to their domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColorFn {
    /// Outputs equal inputs position by position.
    Identity,
    /// Fixed output colors whatever the inputs.
    Const { outputs: Vec<Color> },
    /// Output `k` copies input `indices[k]`.
    Project { indices: Vec<usize> },
    /// Single tuple holding all input colors.
    Pack,
    /// Items of a single tuple input, one per output arc.
    Unpack,
    /// Explicit finite table; undefined outside its rows.
    Table { rows: Vec<TableRow> },
    /// `inner` restricted to inputs whose `k`-th color lies in `domain[k]`.
    Restrict { domain: Vec<ColorSet>, inner: Box<ColorFn> },
    /// `inner` applied to the first `take` inputs, followed by copies of the
    /// inner outputs listed in `append`. Used for signal arcs.
    Wired {
        take: usize,
        inner: Box<ColorFn>,
        append: Vec<usize>,
    },
}

impl ColorFn {
    pub fn table(rows: impl IntoIterator<Item = (Vec<Color>, Vec<Color>)>) -> Self {
        ColorFn::Table {
            rows: rows
                .into_iter()
                .map(|(input, output)| TableRow { input, output })
                .collect(),
        }
    }

    pub fn apply(&self, inputs: &[Color]) -> Option<Vec<Color>> {
        match self {
            ColorFn::Identity => Some(inputs.to_vec()),
            ColorFn::Const { outputs } => Some(outputs.clone()),
            ColorFn::Project { indices } => indices.iter().map(|&i| inputs.get(i).cloned()).collect(),
            ColorFn::Pack => Some(vec![Color::Tuple(inputs.to_vec())]),
            ColorFn::Unpack => match inputs {
                [Color::Tuple(items)] => Some(items.clone()),
                _ => None,
            },
            ColorFn::Table { rows } => rows
                .iter()
                .find(|r| r.input.as_slice() == inputs)
                .map(|r| r.output.clone()),
            ColorFn::Restrict { domain, inner } => {
                if domain.len() == inputs.len() && domain.iter().zip(inputs).all(|(d, c)| d.contains(c)) {
                    inner.apply(inputs)
                } else {
                    None
                }
            }
            ColorFn::Wired { take, inner, append } => {
                let base = inner.apply(inputs.get(..*take)?)?;
                let mut out = base.clone();
                for &i in append {
                    out.push(base.get(i)?.clone());
                }
                Some(out)
            }
        }
    }

    /// Output arity for the given input arity, when it is fixed by the
    /// function itself.
    pub fn output_arity(&self, input_arity: usize) -> Option<usize> {
        match self {
            ColorFn::Identity => Some(input_arity),
            ColorFn::Const { outputs } => Some(outputs.len()),
            ColorFn::Project { indices } => Some(indices.len()),
            ColorFn::Pack => Some(1),
            ColorFn::Unpack => None,
            ColorFn::Table { rows } => rows.first().map(|r| r.output.len()),
            ColorFn::Restrict { inner, .. } => inner.output_arity(input_arity),
            ColorFn::Wired { take, inner, append } => inner.output_arity(*take).map(|n| n + append.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_and_wired() {
        let f = ColorFn::Restrict {
            domain: vec![ColorSet::of([Color::Int(1)]), ColorSet::Any],
            inner: Box::new(ColorFn::Project { indices: vec![1, 0] }),
        };
        assert_eq!(
            f.apply(&[Color::Int(1), Color::Black]),
            Some(vec![Color::Black, Color::Int(1)])
        );
        assert_eq!(f.apply(&[Color::Int(2), Color::Black]), None);

        let w = ColorFn::Wired {
            take: 1,
            inner: Box::new(ColorFn::Identity),
            append: vec![0],
        };
        assert_eq!(
            w.apply(&[Color::Int(5), Color::Black]),
            Some(vec![Color::Int(5), Color::Int(5)])
        );
        assert_eq!(w.output_arity(1), Some(2));
    }

    #[test]
    fn json_forms() {
        let f = ColorFn::table([(vec![Color::str("a")], vec![Color::Int(1)])]);
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(
            json,
            r#"{"kind":"table","rows":[{"input":[{"str":"a"}],"output":[{"int":1}]}]}"#
        );
        let set: ColorSet = serde_json::from_str(r#"{"finite":["black","empty"]}"#).unwrap();
        assert!(set.contains(&Color::Empty));
    }
}
