use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Alphabet, ConditionalTable, NonsignalingResource, ResourceError};
use crate::rational::{parse_rational, Rational, Scalar};

/// On-disk form of a resource or behavior.
///
/// Table keys are comma-separated symbol tuples in party order. Exact
/// probabilities are `"num/den"` strings; floating-point tables use JSON
/// numbers. Output tuples that are absent have probability zero, input tuples
/// must all be present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceFile {
    pub id: String,
    pub parties: Vec<String>,
    pub inputs: BTreeMap<String, Vec<u32>>,
    pub outputs: BTreeMap<String, Vec<u32>>,
    pub table: BTreeMap<String, BTreeMap<String, Value>>,
}

fn key(symbols: &[u32]) -> String {
    symbols
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_key(k: &str, len: usize) -> Result<Vec<u32>, ResourceError> {
    let parts: Vec<&str> = if k.trim().is_empty() {
        vec![]
    } else {
        k.split(',').collect()
    };
    if parts.len() != len {
        return Err(ResourceError::Shape(format!(
            "key `{k}` should have {len} components"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<u32>()
                .map_err(|_| ResourceError::Shape(format!("bad symbol in key `{k}`")))
        })
        .collect()
}

impl ResourceFile {
    pub fn from_table<T: Scalar>(id: &str, table: &ConditionalTable<T>) -> Self {
        let parties = table.parties().to_vec();
        let inputs = parties
            .iter()
            .zip(table.input_alphabets())
            .map(|(p, a)| (p.clone(), a.symbols().to_vec()))
            .collect();
        let outputs = parties
            .iter()
            .zip(table.output_alphabets())
            .map(|(p, a)| (p.clone(), a.symbols().to_vec()))
            .collect();
        let mut t = BTreeMap::new();
        for x in 0..table.input_count() {
            let mut col = BTreeMap::new();
            for (a, v) in table.column(x).iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let value = if T::EXACT {
                    Value::String(v.render())
                } else {
                    serde_json::Number::from_f64(v.to_f64()).map_or(Value::Null, Value::Number)
                };
                col.insert(key(&table.output_symbols(a)), value);
            }
            t.insert(key(&table.input_symbols(x)), col);
        }
        Self {
            id: id.to_string(),
            parties,
            inputs,
            outputs,
            table: t,
        }
    }

    pub fn from_resource(r: &NonsignalingResource) -> Self {
        Self::from_table(r.id(), r.table())
    }

    /// True if every probability is a fraction string.
    pub fn is_exact(&self) -> bool {
        self.table
            .values()
            .all(|col| col.values().all(|v| v.is_string()))
    }

    fn alphabets(&self) -> Result<(Vec<Alphabet>, Vec<Alphabet>), ResourceError> {
        let mut ins = Vec::new();
        let mut outs = Vec::new();
        for p in &self.parties {
            let i = self
                .inputs
                .get(p)
                .ok_or_else(|| ResourceError::UnknownParty(p.clone()))?;
            let o = self
                .outputs
                .get(p)
                .ok_or_else(|| ResourceError::UnknownParty(p.clone()))?;
            ins.push(Alphabet::new(i.clone())?);
            outs.push(Alphabet::new(o.clone())?);
        }
        Ok((ins, outs))
    }

    fn build<T: Scalar>(
        &self,
        parse: impl Fn(&Value) -> Result<T, ResourceError>,
    ) -> Result<ConditionalTable<T>, ResourceError> {
        let (ins, outs) = self.alphabets()?;
        let n = self.parties.len();
        let skeleton =
            ConditionalTable::from_fn(self.parties.clone(), ins.clone(), outs.clone(), |_, _| {
                T::zero()
            })?;
        let mut data = vec![T::zero(); skeleton.data().len()];
        let out_count = skeleton.output_count();
        let mut seen = vec![false; skeleton.input_count()];
        for (xk, col) in &self.table {
            let xs = parse_key(xk, n)?;
            let xi = positions(&xs, &ins, &self.parties)?;
            let x_idx = skeleton.input_radix().encode(&xi);
            seen[x_idx] = true;
            for (ak, v) in col {
                let as_ = parse_key(ak, n)?;
                let ai = positions(&as_, &outs, &self.parties)?;
                data[x_idx * out_count + skeleton.output_radix().encode(&ai)] = parse(v)?;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(ResourceError::MissingInputs(
                skeleton.input_symbols(missing),
            ));
        }
        ConditionalTable::from_data(self.parties.clone(), ins, outs, data)
    }

    pub fn to_exact_table(&self) -> Result<ConditionalTable<Rational>, ResourceError> {
        self.build(|v| match v {
            Value::String(s) => {
                parse_rational(s).map_err(|e| ResourceError::Fraction(e.to_string()))
            }
            Value::Number(n) if n.is_i64() => {
                Ok(Rational::from_integer(n.as_i64().unwrap_or(0).into()))
            }
            other => Err(ResourceError::Fraction(format!(
                "expected a fraction string, got {other}"
            ))),
        })
    }

    pub fn to_float_table(&self) -> Result<ConditionalTable<f64>, ResourceError> {
        self.build(|v| match v {
            Value::String(s) => parse_rational(s)
                .map(|r| f64::from_rational(&r))
                .map_err(|e| ResourceError::Fraction(e.to_string())),
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| ResourceError::Fraction(format!("bad number {n}"))),
            other => Err(ResourceError::Fraction(format!(
                "expected a number, got {other}"
            ))),
        })
    }

    /// Checked conversion: normalized and nonsignaling.
    pub fn to_resource(&self) -> Result<NonsignalingResource, ResourceError> {
        NonsignalingResource::from_table(self.id.clone(), self.to_exact_table()?)
    }

    /// Shape-checked conversion that allows signaling tables.
    pub fn to_unchecked_resource(&self) -> Result<NonsignalingResource, ResourceError> {
        Ok(NonsignalingResource::new_unchecked(
            self.id.clone(),
            self.to_exact_table()?,
        ))
    }
}

fn positions(
    symbols: &[u32],
    alphabets: &[Alphabet],
    parties: &[String],
) -> Result<Vec<usize>, ResourceError> {
    symbols
        .iter()
        .zip(alphabets)
        .zip(parties)
        .map(|((&s, a), p)| {
            a.index_of(s)
                .ok_or_else(|| ResourceError::SymbolOutOfAlphabet {
                    party: p.clone(),
                    symbol: s,
                })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::resource::make_pr_box;

    #[test]
    fn pr_box_json_shape() {
        let f = ResourceFile::from_resource(&make_pr_box());
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["table"]["1,1"]["0,1"], "1/2");
        assert!(v["table"]["1,1"].get("0,0").is_none());
        assert_eq!(v["inputs"]["A"], serde_json::json!([0, 1]));
        let back = f.to_resource().unwrap();
        assert_eq!(back, make_pr_box());
        assert!(f.is_exact());
    }

    #[test]
    fn missing_input_tuple_is_located() {
        let mut f = ResourceFile::from_resource(&make_pr_box());
        f.table.remove("0,1");
        assert!(matches!(f.to_resource(), Err(ResourceError::MissingInputs(v)) if v == vec![0, 1]));
    }

    #[test]
    fn float_tables_parse() {
        let mut f = ResourceFile::from_resource(&make_pr_box());
        for col in f.table.values_mut() {
            for v in col.values_mut() {
                *v = serde_json::json!(0.5);
            }
        }
        assert!(!f.is_exact());
        let t = f.to_float_table().unwrap();
        assert!(t.check_normalized(1e-12).is_ok());
        assert!(f.to_exact_table().is_err());
    }
}
