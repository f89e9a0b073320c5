use std::fmt;

use serde::{Deserialize, Serialize};

use super::ResourceError;
use crate::index::Radix;
use crate::rational::Scalar;

/// Ordered set of symbols a single input or output can take.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Alphabet(Vec<u32>);

impl Alphabet {
    pub fn new(values: Vec<u32>) -> Result<Self, ResourceError> {
        if values.is_empty() {
            return Err(ResourceError::EmptyAlphabet);
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(ResourceError::DuplicateSymbol(*v));
            }
        }
        Ok(Self(values))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        assert!(n > 0, "alphabet must be non-empty");
        Self((0..n as u32).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn symbol(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn index_of(&self, symbol: u32) -> Option<usize> {
        self.0.iter().position(|&s| s == symbol)
    }

    pub fn contains(&self, symbol: u32) -> bool {
        self.0.contains(&symbol)
    }

    /// Smallest symbol not in the alphabet.
    pub fn fresh_symbol(&self) -> u32 {
        self.0.iter().max().map_or(0, |m| m + 1)
    }

    pub fn with_symbol(&self, symbol: u32) -> Result<Self, ResourceError> {
        let mut v = self.0.clone();
        v.push(symbol);
        Self::new(v)
    }
}

impl TryFrom<Vec<u32>> for Alphabet {
    type Error = ResourceError;

    fn try_from(v: Vec<u32>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Alphabet> for Vec<u32> {
    fn from(a: Alphabet) -> Self {
        a.0
    }
}

/// Where a nonsignaling check failed: changing `party`'s input from `input`
/// to `other_input`, with the remaining inputs held at `context`, changes the
/// marginal distribution of the other parties' outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalingWitness<T> {
    pub party: String,
    /// `(party, input symbol)` for every party other than `party`.
    pub context: Vec<(String, u32)>,
    pub input: u32,
    pub other_input: u32,
    /// Marginal over the other parties' outputs (mixed-radix order).
    pub marginal: Vec<T>,
    pub other_marginal: Vec<T>,
}

impl<T: Scalar> fmt::Display for SignalingWitness<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self
            .context
            .iter()
            .map(|(p, x)| format!("{p}={x}"))
            .collect();
        let render = |v: &[T]| v.iter().map(Scalar::render).collect::<Vec<_>>().join(", ");
        write!(
            f,
            "party {} signals: input {} vs {} (context [{}]) gives marginals ({}) vs ({})",
            self.party,
            self.input,
            self.other_input,
            ctx.join(", "),
            render(&self.marginal),
            render(&self.other_marginal)
        )
    }
}

/// Dense conditional table `R(a_1..a_n | x_1..x_n)` over a list of parties.
///
/// Storage is `data[input_index * output_count + output_index]` where both
/// indices are mixed-radix over the per-party alphabet positions (last party
/// varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable<T> {
    parties: Vec<String>,
    inputs: Vec<Alphabet>,
    outputs: Vec<Alphabet>,
    input_radix: Radix,
    output_radix: Radix,
    data: Vec<T>,
}

impl<T: Scalar> ConditionalTable<T> {
    pub fn from_data(
        parties: Vec<String>,
        inputs: Vec<Alphabet>,
        outputs: Vec<Alphabet>,
        data: Vec<T>,
    ) -> Result<Self, ResourceError> {
        if parties.is_empty() {
            return Err(ResourceError::NoParties);
        }
        if inputs.len() != parties.len() || outputs.len() != parties.len() {
            return Err(ResourceError::Shape(format!(
                "{} parties but {} input and {} output alphabets",
                parties.len(),
                inputs.len(),
                outputs.len()
            )));
        }
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].contains(p) {
                return Err(ResourceError::DuplicateParty(p.clone()));
            }
        }
        let input_radix = Radix::new(inputs.iter().map(Alphabet::len).collect());
        let output_radix = Radix::new(outputs.iter().map(Alphabet::len).collect());
        let expected = input_radix.count() * output_radix.count();
        if data.len() != expected {
            return Err(ResourceError::Shape(format!(
                "table has {} entries, expected {expected}",
                data.len()
            )));
        }
        Ok(Self {
            parties,
            inputs,
            outputs,
            input_radix,
            output_radix,
            data,
        })
    }

    /// Builds a table from a function of (input positions, output positions).
    pub fn from_fn(
        parties: Vec<String>,
        inputs: Vec<Alphabet>,
        outputs: Vec<Alphabet>,
        mut f: impl FnMut(&[usize], &[usize]) -> T,
    ) -> Result<Self, ResourceError> {
        let ir = Radix::new(inputs.iter().map(Alphabet::len).collect());
        let or = Radix::new(outputs.iter().map(Alphabet::len).collect());
        let mut data = Vec::with_capacity(ir.count() * or.count());
        for x in ir.iter() {
            for a in or.iter() {
                data.push(f(&x, &a));
            }
        }
        Self::from_data(parties, inputs, outputs, data)
    }

    pub fn parties(&self) -> &[String] {
        &self.parties
    }

    pub fn party_count(&self) -> usize {
        self.parties.len()
    }

    pub fn party_index(&self, party: &str) -> Option<usize> {
        self.parties.iter().position(|p| p == party)
    }

    pub fn input_alphabets(&self) -> &[Alphabet] {
        &self.inputs
    }

    pub fn output_alphabets(&self) -> &[Alphabet] {
        &self.outputs
    }

    pub fn input_radix(&self) -> &Radix {
        &self.input_radix
    }

    pub fn output_radix(&self) -> &Radix {
        &self.output_radix
    }

    pub fn input_count(&self) -> usize {
        self.input_radix.count()
    }

    pub fn output_count(&self) -> usize {
        self.output_radix.count()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Probabilities over all output tuples for one input tuple.
    pub fn column(&self, input_index: usize) -> &[T] {
        let n = self.output_count();
        &self.data[input_index * n..(input_index + 1) * n]
    }

    pub fn entry(&self, input_index: usize, output_index: usize) -> &T {
        &self.data[input_index * self.output_count() + output_index]
    }

    /// Entry addressed by alphabet positions.
    pub fn get(&self, inputs: &[usize], outputs: &[usize]) -> &T {
        self.entry(
            self.input_radix.encode(inputs),
            self.output_radix.encode(outputs),
        )
    }

    /// Entry addressed by symbols; `None` if a symbol is outside its alphabet.
    pub fn prob(&self, inputs: &[u32], outputs: &[u32]) -> Option<&T> {
        let x = self.positions(inputs, &self.inputs)?;
        let a = self.positions(outputs, &self.outputs)?;
        Some(self.get(&x, &a))
    }

    fn positions(&self, symbols: &[u32], alphabets: &[Alphabet]) -> Option<Vec<usize>> {
        if symbols.len() != alphabets.len() {
            return None;
        }
        symbols
            .iter()
            .zip(alphabets)
            .map(|(s, a)| a.index_of(*s))
            .collect()
    }

    pub fn same_signature<U>(&self, other: &ConditionalTable<U>) -> bool {
        self.parties == other.parties
            && self.inputs == other.inputs
            && self.outputs == other.outputs
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ConditionalTable<U> {
        ConditionalTable {
            parties: self.parties.clone(),
            inputs: self.inputs.clone(),
            outputs: self.outputs.clone(),
            input_radix: self.input_radix.clone(),
            output_radix: self.output_radix.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.same_signature(other)
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| a.approx_eq(b, tol))
    }

    /// Entries lie in `[0, 1]` and every column sums to one (within `tol`
    /// for floating-point tables, exactly otherwise).
    pub fn check_normalized(&self, tol: f64) -> Result<(), ResourceError> {
        let zero = T::zero();
        let one = T::one();
        let slack = if T::EXACT { 0.0 } else { tol };
        for x in 0..self.input_count() {
            let col = self.column(x);
            let mut sum = T::zero();
            for (a, v) in col.iter().enumerate() {
                if v.to_f64() < -slack || (T::EXACT && *v < zero) {
                    return Err(ResourceError::Negative {
                        inputs: self.input_symbols(x),
                        outputs: self.output_symbols(a),
                        value: v.render(),
                    });
                }
                sum = sum + v.clone();
            }
            if !sum.approx_eq(&one, tol) {
                return Err(ResourceError::NotNormalized {
                    inputs: self.input_symbols(x),
                    sum: sum.render(),
                });
            }
        }
        Ok(())
    }

    pub fn input_symbols(&self, input_index: usize) -> Vec<u32> {
        self.input_radix
            .decode(input_index)
            .iter()
            .zip(&self.inputs)
            .map(|(&i, a)| a.symbol(i))
            .collect()
    }

    pub fn output_symbols(&self, output_index: usize) -> Vec<u32> {
        self.output_radix
            .decode(output_index)
            .iter()
            .zip(&self.outputs)
            .map(|(&i, a)| a.symbol(i))
            .collect()
    }

    /// Exact single-party nonsignaling check: for every party, every
    /// context of the other inputs and every alternative input, the marginal
    /// of the remaining outputs must not change.
    pub fn validate_nonsignaling(&self, tol: f64) -> Result<(), SignalingWitness<T>> {
        let n = self.party_count();
        for j in 0..n {
            let rest: Vec<usize> = (0..n).filter(|&i| i != j).collect();
            let rest_out = Radix::new(rest.iter().map(|&i| self.outputs[i].len()).collect());
            let ctx_radix = Radix::new(rest.iter().map(|&i| self.inputs[i].len()).collect());
            for ctx in ctx_radix.iter() {
                let mut full = vec![0usize; n];
                for (k, &i) in rest.iter().enumerate() {
                    full[i] = ctx[k];
                }
                full[j] = 0;
                let base = self.rest_marginal(&full, &rest, &rest_out);
                for xj in 1..self.inputs[j].len() {
                    full[j] = xj;
                    let other = self.rest_marginal(&full, &rest, &rest_out);
                    if base.iter().zip(&other).any(|(a, b)| !a.approx_eq(b, tol)) {
                        return Err(SignalingWitness {
                            party: self.parties[j].clone(),
                            context: rest
                                .iter()
                                .zip(&ctx)
                                .map(|(&i, &c)| (self.parties[i].clone(), self.inputs[i].symbol(c)))
                                .collect(),
                            input: self.inputs[j].symbol(0),
                            other_input: self.inputs[j].symbol(xj),
                            marginal: base,
                            other_marginal: other,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Marginal over the outputs of `rest` at the full input tuple `inputs`.
    fn rest_marginal(&self, inputs: &[usize], rest: &[usize], rest_out: &Radix) -> Vec<T> {
        let col = self.column(self.input_radix.encode(inputs));
        let mut out = vec![T::zero(); rest_out.count()];
        let mut digits = vec![0usize; self.party_count()];
        for (a, v) in col.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let mut idx = a;
            self.output_radix.decode_into(&mut idx, &mut digits);
            let r: usize = rest
                .iter()
                .enumerate()
                .map(|(k, &i)| digits[i] * rest_out.stride(k))
                .sum();
            out[r] = out[r].clone() + v.clone();
        }
        out
    }

    /// Marginal table on `keep` (party positions, strictly increasing) with
    /// every dropped party's input fixed to the given alphabet position.
    pub fn marginal_fixing(
        &self,
        keep: &[usize],
        dropped_inputs: &[usize],
    ) -> Result<ConditionalTable<T>, ResourceError> {
        let n = self.party_count();
        if keep.is_empty() {
            return Err(ResourceError::EmptyPartySet);
        }
        if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= n) {
            return Err(ResourceError::Shape(
                "keep positions must be increasing and in range".into(),
            ));
        }
        let dropped: Vec<usize> = (0..n).filter(|i| !keep.contains(i)).collect();
        if dropped.len() != dropped_inputs.len() {
            return Err(ResourceError::Shape(format!(
                "{} dropped parties but {} fixed inputs",
                dropped.len(),
                dropped_inputs.len()
            )));
        }
        for (&d, &x) in dropped.iter().zip(dropped_inputs) {
            if x >= self.inputs[d].len() {
                return Err(ResourceError::Shape(format!(
                    "input position {x} out of range for party {}",
                    self.parties[d]
                )));
            }
        }
        let parties: Vec<String> = keep.iter().map(|&i| self.parties[i].clone()).collect();
        let inputs: Vec<Alphabet> = keep.iter().map(|&i| self.inputs[i].clone()).collect();
        let outputs: Vec<Alphabet> = keep.iter().map(|&i| self.outputs[i].clone()).collect();
        let keep_out = Radix::new(outputs.iter().map(Alphabet::len).collect());
        let keep_in = Radix::new(inputs.iter().map(Alphabet::len).collect());
        let mut data = Vec::with_capacity(keep_in.count() * keep_out.count());
        let mut full = vec![0usize; n];
        for (&d, &x) in dropped.iter().zip(dropped_inputs) {
            full[d] = x;
        }
        for xk in keep_in.iter() {
            for (k, &i) in keep.iter().enumerate() {
                full[i] = xk[k];
            }
            data.extend(self.rest_marginal(&full, keep, &keep_out));
        }
        ConditionalTable::from_data(parties, inputs, outputs, data)
    }

    /// Marginal on `keep` with dropped inputs fixed at their first symbol.
    pub fn marginal_first(&self, keep: &[usize]) -> Result<ConditionalTable<T>, ResourceError> {
        let dropped = self.party_count() - keep.len().min(self.party_count());
        self.marginal_fixing(keep, &vec![0; dropped])
    }

    /// Checks that `receivers`' marginal does not depend on `signalers`'
    /// inputs, with the remaining parties' inputs held at their first symbol.
    pub fn check_subset_nonsignaling(
        &self,
        signalers: &[usize],
        receivers: &[usize],
        tol: f64,
    ) -> Result<(), SignalingWitness<T>> {
        let n = self.party_count();
        let recv_out = Radix::new(receivers.iter().map(|&i| self.outputs[i].len()).collect());
        let recv_in = Radix::new(receivers.iter().map(|&i| self.inputs[i].len()).collect());
        let sig_in = Radix::new(signalers.iter().map(|&i| self.inputs[i].len()).collect());
        let mut full = vec![0usize; n];
        for xr in recv_in.iter() {
            for (k, &i) in receivers.iter().enumerate() {
                full[i] = xr[k];
            }
            for &s in signalers {
                full[s] = 0;
            }
            let base = self.rest_marginal(&full, receivers, &recv_out);
            for s_idx in 1..sig_in.count() {
                let xs = sig_in.decode(s_idx);
                for (k, &i) in signalers.iter().enumerate() {
                    full[i] = xs[k];
                }
                let other = self.rest_marginal(&full, receivers, &recv_out);
                if base.iter().zip(&other).any(|(a, b)| !a.approx_eq(b, tol)) {
                    let first = signalers[0];
                    let context = (0..n)
                        .filter(|i| !signalers.contains(i))
                        .map(|i| (self.parties[i].clone(), self.inputs[i].symbol(full[i])))
                        .collect();
                    return Err(SignalingWitness {
                        party: signalers
                            .iter()
                            .map(|&i| self.parties[i].as_str())
                            .collect::<Vec<_>>()
                            .join("+"),
                        context,
                        input: self.inputs[first].symbol(0),
                        other_input: self.inputs[first].symbol(xs[0]),
                        marginal: base,
                        other_marginal: other,
                    });
                }
            }
        }
        Ok(())
    }

    /// Product table over the concatenated party lists.
    pub fn tensor(
        &self,
        other: &ConditionalTable<T>,
    ) -> Result<ConditionalTable<T>, ResourceError> {
        let mut parties = self.parties.clone();
        parties.extend(other.parties.iter().cloned());
        let mut inputs = self.inputs.clone();
        inputs.extend(other.inputs.iter().cloned());
        let mut outputs = self.outputs.clone();
        outputs.extend(other.outputs.iter().cloned());
        let n1 = self.party_count();
        ConditionalTable::from_fn(parties, inputs, outputs, |x, a| {
            self.get(&x[..n1], &a[..n1]).clone() * other.get(&x[n1..], &a[n1..]).clone()
        })
    }

    /// Same table with the party order permuted: new party `i` is old party
    /// `order[i]`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<ConditionalTable<T>, ResourceError> {
        let n = self.party_count();
        let mut seen = vec![false; n];
        if order.len() != n
            || order
                .iter()
                .any(|&i| i >= n || std::mem::replace(&mut seen[i], true))
        {
            return Err(ResourceError::Shape(
                "not a permutation of the parties".into(),
            ));
        }
        let parties = order.iter().map(|&i| self.parties[i].clone()).collect();
        let inputs = order.iter().map(|&i| self.inputs[i].clone()).collect();
        let outputs = order.iter().map(|&i| self.outputs[i].clone()).collect();
        let mut ox = vec![0; n];
        let mut oa = vec![0; n];
        ConditionalTable::from_fn(parties, inputs, outputs, |x, a| {
            for (new, &old) in order.iter().enumerate() {
                ox[old] = x[new];
                oa[old] = a[new];
            }
            self.get(&ox, &oa).clone()
        })
    }

    /// Renames parties in place of the existing names.
    pub fn with_parties(mut self, parties: Vec<String>) -> Result<Self, ResourceError> {
        if parties.len() != self.parties.len() {
            return Err(ResourceError::Shape("party count mismatch".into()));
        }
        for (i, p) in parties.iter().enumerate() {
            if parties[..i].contains(p) {
                return Err(ResourceError::DuplicateParty(p.clone()));
            }
        }
        self.parties = parties;
        Ok(self)
    }

    /// `sum_i w_i * t_i` over tables sharing one signature.
    pub fn linear_combination<'a>(
        terms: impl IntoIterator<Item = (T, &'a ConditionalTable<T>)>,
    ) -> Result<ConditionalTable<T>, ResourceError> {
        let mut acc: Option<ConditionalTable<T>> = None;
        for (w, t) in terms {
            match &mut acc {
                None => acc = Some(t.map(|v| w.clone() * v.clone())),
                Some(a) => {
                    if !a.same_signature(t) {
                        return Err(ResourceError::SignatureMismatch);
                    }
                    for (d, v) in a.data.iter_mut().zip(&t.data) {
                        *d = d.clone() + w.clone() * v.clone();
                    }
                }
            }
        }
        acc.ok_or(ResourceError::EmptyPartySet)
    }
}
