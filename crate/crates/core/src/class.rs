//! Finite expert classes over a finite context set.

use crate::error::{Error, Result};
use crate::num::Real;
use serde::{Deserialize, Deserializer, Serialize};

/// Experts as tables from context id to probability.
///
/// Context ids are positions in `contexts`; the labels are only carried for I/O.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawClass<T>", bound(serialize = "T: Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ExpertClass<T = f64> {
    contexts: Vec<String>,
    experts: Vec<Vec<T>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClass<T> {
    #[serde(deserialize_with = "labels")]
    contexts: Vec<String>,
    experts: Vec<Vec<T>>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Label {
    Str(String),
    Int(i64),
}

fn labels<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    let raw: Vec<Label> = Vec::deserialize(d)?;
    Ok(raw
        .into_iter()
        .map(|l| match l {
            Label::Str(s) => s,
            Label::Int(i) => i.to_string(),
        })
        .collect())
}

impl<T: Real> TryFrom<RawClass<T>> for ExpertClass<T> {
    type Error = Error;
    fn try_from(r: RawClass<T>) -> Result<Self> {
        ExpertClass::new(r.contexts, r.experts)
    }
}

impl<T: Real> ExpertClass<T> {
    pub fn new(contexts: Vec<String>, experts: Vec<Vec<T>>) -> Result<Self> {
        if experts.is_empty() {
            return Err(Error::EmptyClass);
        }
        if contexts.is_empty() {
            return Err(Error::InvalidArgument("no contexts".into()));
        }
        for (i, row) in experts.iter().enumerate() {
            if row.len() != contexts.len() {
                return Err(Error::DimensionMismatch { expected: contexts.len(), got: row.len() });
            }
            if let Some(v) = row.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
                return Err(Error::InvalidArgument(format!("expert {i} has value {v} outside [0, 1]")));
            }
        }
        Ok(ExpertClass { contexts, experts })
    }

    /// Contexts labelled `0..k`.
    pub fn with_contexts(k: usize, experts: Vec<Vec<T>>) -> Result<Self> {
        Self::new((0..k).map(|i| i.to_string()).collect(), experts)
    }

    /// Constant experts over a single context.
    pub fn constants(values: &[T]) -> Result<Self> {
        Self::with_contexts(1, values.iter().map(|&v| vec![v]).collect())
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn len(&self) -> usize {
        self.experts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.experts.is_empty()
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn experts(&self) -> &[Vec<T>] {
        &self.experts
    }

    pub fn value(&self, expert: usize, context: usize) -> T {
        self.experts[expert][context]
    }

    /// Pairs `(i, j)`, `i < j`, of experts with identical tables.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.experts.len() {
            for j in i + 1..self.experts.len() {
                if self.experts[i] == self.experts[j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Subclass keeping the listed experts in the given order.
    pub fn select(&self, idx: &[usize]) -> Result<Self> {
        let experts = idx
            .iter()
            .map(|&i| self.experts.get(i).cloned().ok_or_else(|| Error::InvalidArgument(format!("no expert {i}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.contexts.clone(), experts)
    }

    /// Log-likelihood of outcome `y` under expert `f` at context `x`.
    pub fn log_lik(&self, f: usize, x: usize, y: bool) -> T {
        -crate::loss::log_loss(self.experts[f][x], y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c: ExpertClass = serde_json::from_str(r#"{"contexts":["a",2],"experts":[[0.1,0.2],[0.3,0.4]]}"#).unwrap();
        assert_eq!(c.contexts(), &["a".to_string(), "2".to_string()]);
        assert_eq!(c.value(1, 0), 0.3);
        let s = serde_json::to_string(&c).unwrap();
        let back: ExpertClass = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation() {
        assert!(matches!(ExpertClass::<f64>::constants(&[]), Err(Error::EmptyClass)));
        assert!(ExpertClass::constants(&[1.5]).is_err());
        assert!(ExpertClass::with_contexts(2, vec![vec![0.5]]).is_err());
        assert!(serde_json::from_str::<ExpertClass>(r#"{"contexts":[0],"experts":[[2.0]]}"#).is_err());
        assert!(serde_json::from_str::<ExpertClass>(r#"{"contexts":[0],"experts":[[0.2]],"x":1}"#).is_err());
    }

    #[test]
    fn duplicates_are_flagged_not_rejected() {
        let c = ExpertClass::constants(&[0.3, 0.7, 0.3, 0.3]).unwrap();
        assert_eq!(c.duplicates(), vec![(0, 2), (0, 3), (2, 3)]);
        assert_eq!(c.len(), 4);
    }
}
