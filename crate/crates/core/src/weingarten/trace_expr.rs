//! Haar averages of products of traces, evaluated by loop counting.
//!
//! A [`TraceExpression`] is a product of traces of words in `U`, `U†` and
//! fixed `n × n` matrices. For every pair `(σ, τ)` the unitaries are deleted,
//! the row index of the `k`-th `U` is joined to the row index of the
//! `σ(k)`-th `U†` and the column index to that of the `τ(k)`-th `U†`. The
//! remaining wiring is a disjoint union of closed loops; each loop contributes
//! the trace of the product of the constants met along it (`n` for an empty
//! loop) and the pair is weighted by `Wg(n, τσ⁻¹)`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{wg_cycle_type, WeingartenError};
use crate::linalg::{from_row_major_pairs, to_row_major_pairs, CMatrix, C64};
use crate::symgroup::{CycleType, Permutation};

/// Largest number of `U` factors accepted by [`evaluate_trace_expression`].
pub const MAX_TRACE_DEGREE: usize = 5;

/// One factor of a trace word. Slots are 1-based; `Ubar` stands for `U†`
/// (the entrywise conjugate of `U`, transposed) at that position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Token {
    U(usize),
    Ubar(usize),
    C(String),
}

/// `∏_w tr(word_w)` with fixed matrices in a side table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TraceExpressionJson", into = "TraceExpressionJson")]
pub struct TraceExpression {
    pub n: usize,
    pub words: Vec<Vec<Token>>,
    pub constants: BTreeMap<String, CMatrix>,
}

#[derive(Serialize, Deserialize)]
struct TraceExpressionJson {
    n: usize,
    words: Vec<Vec<Token>>,
    #[serde(default)]
    constants: BTreeMap<String, Vec<[f64; 2]>>,
}

impl TryFrom<TraceExpressionJson> for TraceExpression {
    type Error = WeingartenError;

    fn try_from(raw: TraceExpressionJson) -> Result<Self, Self::Error> {
        let n = raw.n;
        let constants = raw
            .constants
            .into_iter()
            .map(|(id, data)| {
                from_row_major_pairs(n, n, &data)
                    .map(|m| (id.clone(), m))
                    .ok_or_else(|| {
                        WeingartenError::Malformed(format!(
                            "constant {id:?} has {} entries, expected {}",
                            data.len(),
                            n * n
                        ))
                    })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { n, words: raw.words, constants })
    }
}

impl From<TraceExpression> for TraceExpressionJson {
    fn from(e: TraceExpression) -> Self {
        Self {
            n: e.n,
            words: e.words,
            constants: e
                .constants
                .iter()
                .map(|(id, m)| (id.clone(), to_row_major_pairs(m)))
                .collect(),
        }
    }
}

impl TraceExpression {
    pub fn new(n: usize) -> Self {
        Self { n, words: Vec::new(), constants: BTreeMap::new() }
    }

    pub fn with_constant(mut self, id: &str, m: CMatrix) -> Self {
        self.constants.insert(id.to_owned(), m);
        self
    }

    pub fn with_word(mut self, word: Vec<Token>) -> Self {
        self.words.push(word);
        self
    }

    pub fn from_json(s: &str) -> Result<Self, WeingartenError> {
        serde_json::from_str(s).map_err(|e| WeingartenError::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    /// Checks slot and constant consistency; returns the degree `p`.
    pub fn validate(&self) -> Result<usize, WeingartenError> {
        let malformed = |msg: String| Err(WeingartenError::Malformed(msg));
        if self.n == 0 {
            return Err(WeingartenError::ZeroDimension);
        }
        let mut u_slots = Vec::new();
        let mut ubar_slots = Vec::new();
        for (w, word) in self.words.iter().enumerate() {
            if word.is_empty() {
                return malformed(format!("word {w} is empty"));
            }
            for token in word {
                match token {
                    Token::U(k) => u_slots.push(*k),
                    Token::Ubar(k) => ubar_slots.push(*k),
                    Token::C(id) => match self.constants.get(id) {
                        None => return malformed(format!("unknown constant {id:?}")),
                        Some(m) if m.nrows() != self.n || m.ncols() != self.n => {
                            return malformed(format!("constant {id:?} is not {0}x{0}", self.n))
                        }
                        Some(_) => {}
                    },
                }
            }
        }
        let p = u_slots.len();
        if ubar_slots.len() != p {
            return malformed(format!(
                "open wiring: {p} U factors but {} U† factors",
                ubar_slots.len()
            ));
        }
        for (name, slots) in [("U", &mut u_slots), ("Ubar", &mut ubar_slots)] {
            slots.sort_unstable();
            if slots.iter().copied().ne(1..=p) {
                return malformed(format!("{name} slots {slots:?} are not exactly 1..={p}"));
            }
        }
        Ok(p)
    }

    fn all_real(&self) -> bool {
        self.constants
            .values()
            .all(|m| m.iter().all(|z| z.im == 0.0 && z.re.is_finite()))
    }
}

/// Result of [`evaluate_trace_expression`]: exact when every constant is real
/// (floats convert to rationals exactly), otherwise complex floating point.
#[derive(Clone, Debug, PartialEq)]
pub enum TraceValue {
    Exact(BigRational),
    Approx(C64),
}

impl TraceValue {
    pub fn to_complex(&self) -> C64 {
        match self {
            TraceValue::Exact(r) => C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0),
            TraceValue::Approx(z) => *z,
        }
    }
}

impl fmt::Display for TraceValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceValue::Exact(r) => write!(f, "{r}"),
            TraceValue::Approx(z) => write!(f, "{}{:+}i", z.re, z.im),
        }
    }
}

struct Wiring {
    tokens: Vec<Token>,
    next: Vec<usize>,
    pos_u: Vec<usize>,
    pos_ubar: Vec<usize>,
}

impl Wiring {
    fn new(expr: &TraceExpression, p: usize) -> Self {
        let mut tokens = Vec::new();
        let mut next = Vec::new();
        for word in &expr.words {
            let base = tokens.len();
            for (i, token) in word.iter().enumerate() {
                tokens.push(token.clone());
                next.push(base + (i + 1) % word.len());
            }
        }
        let mut pos_u = vec![0; p];
        let mut pos_ubar = vec![0; p];
        for (t, token) in tokens.iter().enumerate() {
            match token {
                Token::U(k) => pos_u[k - 1] = t,
                Token::Ubar(k) => pos_ubar[k - 1] = t,
                Token::C(_) => {}
            }
        }
        Self { tokens, next, pos_u, pos_ubar }
    }

    /// Closed loops after deleting the unitaries, as sequences of constant ids
    /// in traversal order.
    fn loops(&self, sigma: &Permutation, tau_inv: &Permutation) -> Vec<Vec<&str>> {
        let mut visited = vec![false; self.tokens.len()];
        let mut out = Vec::new();
        for start in 0..self.tokens.len() {
            if visited[start] {
                continue;
            }
            let mut seq = Vec::new();
            let mut t = start;
            loop {
                visited[t] = true;
                // Enter token t from its left side, leave from the right side
                // of the token the wiring leads to.
                let exit = match &self.tokens[t] {
                    Token::C(id) => {
                        seq.push(id.as_str());
                        t
                    }
                    Token::U(k) => self.pos_ubar[sigma.image(*k) - 1],
                    Token::Ubar(m) => self.pos_u[tau_inv.image(*m) - 1],
                };
                t = self.next[exit];
                if t == start {
                    break;
                }
            }
            out.push(seq);
        }
        out
    }
}

type RationalMatrix = Vec<Vec<BigRational>>;

fn rational_matrix(m: &CMatrix) -> RationalMatrix {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| BigRational::from_float(m[(i, j)].re).expect("finite"))
                .collect()
        })
        .collect()
}

fn rational_loop_trace(seq: &[&str], mats: &HashMap<&str, RationalMatrix>, n: usize) -> BigRational {
    if seq.is_empty() {
        return BigRational::from_integer(n.into());
    }
    let mut acc = mats[seq[0]].clone();
    for id in &seq[1..] {
        let b = &mats[id];
        acc = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(BigRational::zero(), |s, k| s + &acc[i][k] * &b[k][j]))
                    .collect()
            })
            .collect();
    }
    (0..n).fold(BigRational::zero(), |s, i| s + &acc[i][i])
}

fn complex_loop_trace(seq: &[&str], mats: &BTreeMap<String, CMatrix>, n: usize) -> C64 {
    if seq.is_empty() {
        return C64::new(n as f64, 0.0);
    }
    let mut acc = mats[seq[0]].clone();
    for id in &seq[1..] {
        acc = crate::linalg::matmul(&acc, &mats[*id]);
    }
    crate::linalg::trace(&acc)
}

/// `E_U[∏ tr(word)]` over Haar `U(n)`.
pub fn evaluate_trace_expression(expr: &TraceExpression) -> Result<TraceValue, WeingartenError> {
    let p = expr.validate()?;
    if p > MAX_TRACE_DEGREE {
        return Err(WeingartenError::DegreeTooLarge {
            what: "evaluate_trace_expression",
            p,
            max: MAX_TRACE_DEGREE,
        });
    }
    let n = expr.n;
    let wiring = Wiring::new(expr, p);

    // Collect Σ over (σ, τ) as a multiset of (loop structure, τσ⁻¹ class).
    let mut terms: HashMap<(Vec<Vec<&str>>, CycleType), i64> = HashMap::new();
    let perms: Vec<Permutation> = Permutation::all(p).collect();
    for sigma in &perms {
        let sigma_inv = sigma.inverse();
        for tau in &perms {
            let loops = wiring.loops(sigma, &tau.inverse());
            let class = tau.compose_unchecked(&sigma_inv).cycle_type();
            *terms.entry((loops, class)).or_insert(0) += 1;
        }
    }
    let mut wg_values = HashMap::new();
    for (_, class) in terms.keys() {
        if !wg_values.contains_key(class) {
            wg_values.insert(class.clone(), wg_cycle_type(n as u64, class)?);
        }
    }

    if expr.all_real() {
        let mats: HashMap<&str, RationalMatrix> = expr
            .constants
            .iter()
            .map(|(id, m)| (id.as_str(), rational_matrix(m)))
            .collect();
        let mut memo: HashMap<Vec<&str>, BigRational> = HashMap::new();
        let mut total = BigRational::zero();
        for ((loops, class), count) in &terms {
            let mut weight = BigRational::one();
            for seq in loops {
                let value = memo
                    .entry(seq.clone())
                    .or_insert_with(|| rational_loop_trace(seq, &mats, n));
                weight *= value.clone();
            }
            total += weight * &wg_values[class] * BigRational::from_integer((*count).into());
        }
        Ok(TraceValue::Exact(total))
    } else {
        let mut memo: HashMap<Vec<&str>, C64> = HashMap::new();
        // Sum in a fixed order so the float result is reproducible.
        let mut keys: Vec<_> = terms.iter().collect();
        keys.sort_by(|a, b| a.0.cmp(b.0));
        let mut total = C64::new(0.0, 0.0);
        for ((loops, class), count) in keys {
            let mut weight = C64::new(1.0, 0.0);
            for seq in loops {
                weight *= *memo
                    .entry(seq.clone())
                    .or_insert_with(|| complex_loop_trace(seq, &expr.constants, n));
            }
            let wg = wg_values[class].to_f64().expect("finite");
            total += weight * wg * (*count as f64);
        }
        Ok(TraceValue::Approx(total))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real_diagonal;
    use crate::symgroup::Permutation;
    use crate::weingarten::wg;

    fn rat(num: i64, den: i64) -> BigRational {
        BigRational::new(num.into(), den.into())
    }

    fn c(id: &str) -> Token {
        Token::C(id.into())
    }

    fn exact(v: TraceValue) -> BigRational {
        match v {
            TraceValue::Exact(r) => r,
            other => panic!("expected exact value, got {other:?}"),
        }
    }

    #[test]
    fn conjugation_by_u_factorizes() {
        let a = from_real_diagonal(&[0.5, 0.25, 2.0]);
        let b = from_real_diagonal(&[1.0, -1.0, 3.0]);
        let expr = TraceExpression::new(3)
            .with_constant("A", a)
            .with_constant("B", b)
            .with_word(vec![Token::U(1), c("A"), Token::Ubar(1), c("B")]);
        // tr A · tr B / n = 2.75 · 3 / 3
        assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(11, 4));

        for n in 1..=6usize {
            let id = from_real_diagonal(&vec![1.0; n]);
            let expr = TraceExpression::new(n)
                .with_constant("I", id.clone())
                .with_constant("J", id)
                .with_word(vec![Token::U(1), c("I"), Token::Ubar(1), c("J")]);
            assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(n as i64, 1));
        }
    }

    #[test]
    fn trace_times_conjugate_trace() {
        for n in 1..=6usize {
            let expr = TraceExpression::new(n)
                .with_word(vec![Token::U(1)])
                .with_word(vec![Token::Ubar(1)]);
            assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(1, 1));
        }
    }

    #[test]
    fn unitarity_without_constants() {
        // tr(U U†) = n identically.
        let expr = TraceExpression::new(4).with_word(vec![Token::U(1), Token::Ubar(1)]);
        assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(4, 1));
        // |tr U|⁴ has mean 2 once n ≥ 2.
        let expr = TraceExpression::new(4)
            .with_word(vec![Token::U(1)])
            .with_word(vec![Token::U(2)])
            .with_word(vec![Token::Ubar(1)])
            .with_word(vec![Token::Ubar(2)]);
        assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(2, 1));
    }

    #[test]
    fn four_point_boundary_formula() {
        // E tr(UΛU†Ω UΛU†Ω) against the two-class closed form.
        let lam = [0.25, 0.5, 1.0, 0.75];
        let om = [0.125, 0.5, 0.25, 0.125];
        let n = lam.len();
        let expr = TraceExpression::new(n)
            .with_constant("L", from_real_diagonal(&lam))
            .with_constant("O", from_real_diagonal(&om))
            .with_word(vec![
                Token::U(1),
                c("L"),
                Token::Ubar(1),
                c("O"),
                Token::U(2),
                c("L"),
                Token::Ubar(2),
                c("O"),
            ]);
        let got = exact(evaluate_trace_expression(&expr).unwrap());
        let q = |x: f64| BigRational::from_float(x).unwrap();
        let tr_l: BigRational = lam.iter().map(|&x| q(x)).sum();
        let tr_l2: BigRational = lam.iter().map(|&x| q(x * x)).sum();
        let tr_o: BigRational = om.iter().map(|&x| q(x)).sum();
        let tr_o2: BigRational = om.iter().map(|&x| q(x * x)).sum();
        let id = wg(n as u64, &Permutation::identity(2)).unwrap();
        let swap = wg(n as u64, &Permutation::parse_cycles("(1 2)", Some(2)).unwrap()).unwrap();
        let expected = (&tr_l * &tr_l * &tr_o2 + &tr_l2 * &tr_o * &tr_o) * id
            + (&tr_l * &tr_l * &tr_o * &tr_o + &tr_l2 * &tr_o2) * swap;
        assert_eq!(got, expected);
    }

    #[test]
    fn complex_constants_fall_back_to_floats() {
        let mut a = from_real_diagonal(&[1.0, 2.0]);
        a[(0, 1)] = C64::new(0.0, 1.0);
        let expr = TraceExpression::new(2)
            .with_constant("A", a)
            .with_word(vec![Token::U(1), c("A"), Token::Ubar(1)]);
        match evaluate_trace_expression(&expr).unwrap() {
            TraceValue::Approx(z) => assert!((z - C64::new(3.0, 0.0)).norm() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let open = TraceExpression::new(2).with_word(vec![Token::U(1)]);
        assert!(matches!(evaluate_trace_expression(&open), Err(WeingartenError::Malformed(_))));
        let dup = TraceExpression::new(2)
            .with_word(vec![Token::U(1), Token::Ubar(1)])
            .with_word(vec![Token::U(1), Token::Ubar(2)]);
        assert!(evaluate_trace_expression(&dup).is_err());
        let missing = TraceExpression::new(2).with_word(vec![Token::U(1), c("X"), Token::Ubar(1)]);
        assert!(evaluate_trace_expression(&missing).is_err());
        let empty = TraceExpression::new(2).with_word(vec![]);
        assert!(evaluate_trace_expression(&empty).is_err());
        let mut big = TraceExpression::new(6);
        for k in 1..=6 {
            big = big.with_word(vec![Token::U(k), Token::Ubar(k)]);
        }
        assert!(matches!(
            evaluate_trace_expression(&big),
            Err(WeingartenError::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn json_format() {
        let json = r#"{"n": 2, "words": [[{"U": 1}, {"C": "A"}, {"Ubar": 1}]],
                       "constants": {"A": [[1,0],[0,0],[0,0],[3,0]]}}"#;
        let expr = TraceExpression::from_json(json).unwrap();
        assert_eq!(expr.words[0][1], Token::C("A".into()));
        assert_eq!(exact(evaluate_trace_expression(&expr).unwrap()), rat(4, 1));
        let back = TraceExpression::from_json(&expr.to_json()).unwrap();
        assert_eq!(back, expr);
        assert!(TraceExpression::from_json(r#"{"n": 2, "words": [], "constants": {"A": [[1,0]]}}"#).is_err());
    }
}
