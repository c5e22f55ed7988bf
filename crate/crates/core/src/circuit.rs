//! Rank-1 constraint system for the distinct identity criterion.
//!
//! The circuit proves, for one own equation F and k neighbor equations G_j
//! over a shared secret solution vector s:
//!
//! ```text
//!   F(s) = y          (the prover owns its bundle)
//!   G_j(s) != z_j     (the prover does not own any neighbor bundle)
//! ```
//!
//! Composition: one shared Pow gadget chain per unknown (log2(np) squarings
//! each), one Dot gadget per equation (nx product constraints, sum as a free
//! linear combination), one Equal gadget for F and one NotEqual gadget per
//! G_j. Total constraints: nx*log2(np) + (k+1)*nx + 1 + k.
//!
//! Wire layout (fixed, relied on by witness synthesis and the proving
//! backend):
//!
//! ```text
//!   instance: F.coeffs (nx), F.constant,
//!             then per neighbor j: G_j.coeffs (nx), G_j.constant
//!   witness:  s (nx),
//!             power chains (nx * log2(np); chain i holds s_i^2 .. s_i^np),
//!             products ((k+1) * nx; equation-major, own equation first),
//!             inverse hints (k; v_j = (G_j(s) evaluation gap)^-1)
//! ```

use thiserror::Error;

use crate::algebra::{check_solution, FieldElement, Orthonym, QuizEquation};
use crate::params::CircuitParams;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("own quiz equation does not hold for the supplied orthonym")]
    OwnEquationMismatch,
    #[error("orthonym also solves neighbor equation {0}")]
    SybilCollision(usize),
    #[error("{what}: expected {expected}, got {got}")]
    Shape {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("degree {0} is not a power of 2")]
    BadDegree(u16),
    #[error("neighbor {0} reuses the own pseudonym")]
    DuplicatePseudonym(usize),
}

/// A variable reference inside the constraint system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wire {
    /// The constant-one input.
    One,
    /// Public input, indexed into the instance vector.
    Instance(usize),
    /// Private input, indexed into the witness vector.
    Witness(usize),
}

/// Sparse linear combination of wires.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinComb {
    terms: Vec<(FieldElement, Wire)>,
}

impl LinComb {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_wire(Wire::One)
    }

    pub fn from_wire(w: Wire) -> Self {
        Self {
            terms: vec![(FieldElement::one(), w)],
        }
    }

    pub fn terms(&self) -> &[(FieldElement, Wire)] {
        &self.terms
    }

    pub fn push(&mut self, coeff: FieldElement, wire: Wire) {
        self.terms.push((coeff, wire));
    }

    /// self - other, term-by-term (no consolidation; wires stay distinct in
    /// this circuit family).
    pub fn sub(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (c, w) in &other.terms {
            terms.push((FieldElement::zero().sub(*c), *w));
        }
        Self { terms }
    }

    fn evaluate(&self, instance: &[FieldElement], witness: &[FieldElement]) -> FieldElement {
        let mut acc = FieldElement::zero();
        for (coeff, wire) in &self.terms {
            let v = match wire {
                Wire::One => FieldElement::one(),
                Wire::Instance(i) => instance[*i],
                Wire::Witness(i) => witness[*i],
            };
            acc = acc.add(coeff.mul(v));
        }
        acc
    }

    fn dump(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(c, w)| {
                let wire = match w {
                    Wire::One => "one".to_string(),
                    Wire::Instance(i) => format!("i{i}"),
                    Wire::Witness(i) => format!("w{i}"),
                };
                format!("{}*{wire}", c.to_hex())
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// One rank-1 constraint `<a,w> * <b,w> = <c,w>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub a: LinComb,
    pub b: LinComb,
    pub c: LinComb,
}

/// Incremental constraint-system builder exposing the four gadgets the
/// criterion is composed from.
#[derive(Debug, Default)]
pub struct CircuitBuilder {
    num_instance: usize,
    num_witness: usize,
    constraints: Vec<Constraint>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc_instance(&mut self) -> Wire {
        let w = Wire::Instance(self.num_instance);
        self.num_instance += 1;
        w
    }

    pub fn alloc_witness(&mut self) -> Wire {
        let w = Wire::Witness(self.num_witness);
        self.num_witness += 1;
        w
    }

    pub fn enforce(&mut self, a: LinComb, b: LinComb, c: LinComb) {
        self.constraints.push(Constraint { a, b, c });
    }

    /// Repeated-squaring chain computing `s^np`; emits exactly log2(np)
    /// constraints and returns the wire carrying the final power.
    pub fn pow_gadget(&mut self, s: Wire, np: u16) -> Result<Wire, CircuitError> {
        if np < 2 || !np.is_power_of_two() {
            return Err(CircuitError::BadDegree(np));
        }
        let mut cur = s;
        for _ in 0..np.trailing_zeros() {
            let sq = self.alloc_witness();
            self.enforce(
                LinComb::from_wire(cur),
                LinComb::from_wire(cur),
                LinComb::from_wire(sq),
            );
            cur = sq;
        }
        Ok(cur)
    }

    /// Dot product `sum_i coeff_i * pow_i`: one product constraint per
    /// element, the sum itself is a free linear combination.
    pub fn dot_gadget(
        &mut self,
        coeff_wires: &[Wire],
        power_wires: &[Wire],
    ) -> Result<LinComb, CircuitError> {
        if coeff_wires.len() != power_wires.len() {
            return Err(CircuitError::Shape {
                what: "dot operand length",
                expected: coeff_wires.len(),
                got: power_wires.len(),
            });
        }
        let mut sum = LinComb::zero();
        for (&m, &p) in coeff_wires.iter().zip(power_wires) {
            let prod = self.alloc_witness();
            self.enforce(
                LinComb::from_wire(m),
                LinComb::from_wire(p),
                LinComb::from_wire(prod),
            );
            sum.push(FieldElement::one(), prod);
        }
        Ok(sum)
    }

    /// One constraint `1 * a = b`; satisfiable iff a = b.
    pub fn equal_gadget(&mut self, a: LinComb, b: LinComb) {
        self.enforce(LinComb::one(), a, b);
    }

    /// One constraint `v * (a - b) = 1` over a fresh hint wire v; a witness
    /// for v exists iff a != b. Returns the hint wire.
    pub fn not_equal_gadget(&mut self, a: &LinComb, b: &LinComb) -> Wire {
        let v = self.alloc_witness();
        self.enforce(LinComb::from_wire(v), a.sub(b), LinComb::one());
        v
    }

    pub fn build(self, params: CircuitParams) -> DicConstraintSystem {
        DicConstraintSystem {
            params,
            num_instance: self.num_instance,
            num_witness: self.num_witness,
            constraints: self.constraints,
        }
    }
}

/// The built constraint system for one parameter tuple. Immutable; safe to
/// share across concurrent provers.
#[derive(Debug, Clone)]
pub struct DicConstraintSystem {
    params: CircuitParams,
    num_instance: usize,
    num_witness: usize,
    constraints: Vec<Constraint>,
}

impl DicConstraintSystem {
    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn num_instance(&self) -> usize {
        self.num_instance
    }

    pub fn num_witness(&self) -> usize {
        self.num_witness
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Index of the first unsatisfied constraint, if any. `instance` excludes
    /// the implicit constant-one wire.
    pub fn first_unsatisfied(
        &self,
        instance: &[FieldElement],
        witness: &[FieldElement],
    ) -> Option<usize> {
        assert_eq!(instance.len(), self.num_instance, "instance length");
        assert_eq!(witness.len(), self.num_witness, "witness length");
        self.constraints.iter().position(|c| {
            c.a.evaluate(instance, witness).mul(c.b.evaluate(instance, witness))
                != c.c.evaluate(instance, witness)
        })
    }

    pub fn is_satisfied(&self, instance: &[FieldElement], witness: &[FieldElement]) -> bool {
        self.first_unsatisfied(instance, witness).is_none()
    }

    /// Textual dump for external re-evaluation: a header line with the
    /// dimensions, then one constraint per line as `a | b | c` with each
    /// linear combination spelled `hex*wire + ...` (wires: `one`, `iN`, `wN`).
    pub fn dump(&self) -> String {
        let mut out = format!(
            "dic-r1cs nx={} np={} k={} instance={} witness={} constraints={}\n",
            self.params.nx(),
            self.params.np(),
            self.params.k(),
            self.num_instance,
            self.num_witness,
            self.constraints.len()
        );
        for c in &self.constraints {
            out.push_str(&format!("{} | {} | {}\n", c.a.dump(), c.b.dump(), c.c.dump()));
        }
        out
    }
}

/// Builds the criterion circuit for one parameter tuple.
pub fn build_circuit(params: CircuitParams) -> DicConstraintSystem {
    let nx = params.nx() as usize;
    let k = params.k() as usize;
    let mut b = CircuitBuilder::new();

    let mut equations = Vec::with_capacity(k + 1);
    for _ in 0..=k {
        let coeffs: Vec<Wire> = (0..nx).map(|_| b.alloc_instance()).collect();
        let constant = b.alloc_instance();
        equations.push((coeffs, constant));
    }

    let s: Vec<Wire> = (0..nx).map(|_| b.alloc_witness()).collect();
    let powers: Vec<Wire> = s
        .iter()
        .map(|&si| b.pow_gadget(si, params.np()).expect("params validated"))
        .collect();

    let sums: Vec<LinComb> = equations
        .iter()
        .map(|(coeffs, _)| b.dot_gadget(coeffs, &powers).expect("lengths match"))
        .collect();

    b.equal_gadget(sums[0].clone(), LinComb::from_wire(equations[0].1));
    for j in 0..k {
        b.not_equal_gadget(&sums[j + 1], &LinComb::from_wire(equations[j + 1].1));
    }

    b.build(params)
}

/// The public statement: the prover's own equation plus the k locally
/// observed neighbor equations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicStatement {
    params: CircuitParams,
    own: QuizEquation,
    neighbors: Vec<QuizEquation>,
}

impl DicStatement {
    pub fn new(
        params: CircuitParams,
        own: QuizEquation,
        neighbors: Vec<QuizEquation>,
    ) -> Result<Self, CircuitError> {
        let nx = params.nx() as usize;
        if own.coeffs.len() != nx {
            return Err(CircuitError::Shape {
                what: "own coefficient count",
                expected: nx,
                got: own.coeffs.len(),
            });
        }
        if neighbors.len() != params.k() as usize {
            return Err(CircuitError::Shape {
                what: "neighbor count",
                expected: params.k() as usize,
                got: neighbors.len(),
            });
        }
        for (j, n) in neighbors.iter().enumerate() {
            if n.coeffs.len() != nx {
                return Err(CircuitError::Shape {
                    what: "neighbor coefficient count",
                    expected: nx,
                    got: n.coeffs.len(),
                });
            }
            if n.pseudonym == own.pseudonym {
                return Err(CircuitError::DuplicatePseudonym(j));
            }
        }
        Ok(Self {
            params,
            own,
            neighbors,
        })
    }

    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn own(&self) -> &QuizEquation {
        &self.own
    }

    pub fn neighbors(&self) -> &[QuizEquation] {
        &self.neighbors
    }

    /// Flattens the statement into the public-input vector in circuit wire
    /// order: own coefficients, own constant, then per neighbor its
    /// coefficients and constant.
    pub fn instance_vector(&self) -> Vec<FieldElement> {
        let mut v = Vec::with_capacity(self.params.instance_len());
        v.extend_from_slice(&self.own.coeffs);
        v.push(self.own.constant);
        for n in &self.neighbors {
            v.extend_from_slice(&n.coeffs);
            v.push(n.constant);
        }
        v
    }
}

/// A parsed instance vector; the inverse of [`DicStatement::instance_vector`]
/// up to the pseudonym ids (which never enter the circuit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DicInstance {
    params: CircuitParams,
    values: Vec<FieldElement>,
}

impl DicInstance {
    pub fn from_vec(params: CircuitParams, values: Vec<FieldElement>) -> Result<Self, CircuitError> {
        if values.len() != params.instance_len() {
            return Err(CircuitError::Shape {
                what: "instance vector length",
                expected: params.instance_len(),
                got: values.len(),
            });
        }
        Ok(Self { params, values })
    }

    fn block(&self, e: usize) -> &[FieldElement] {
        let w = self.params.nx() as usize + 1;
        &self.values[e * w..(e + 1) * w]
    }

    pub fn own_coeffs(&self) -> &[FieldElement] {
        &self.block(0)[..self.params.nx() as usize]
    }

    pub fn own_constant(&self) -> FieldElement {
        self.block(0)[self.params.nx() as usize]
    }

    pub fn neighbor_coeffs(&self, j: usize) -> &[FieldElement] {
        &self.block(1 + j)[..self.params.nx() as usize]
    }

    pub fn neighbor_constant(&self, j: usize) -> FieldElement {
        self.block(1 + j)[self.params.nx() as usize]
    }

    pub fn to_vec(&self) -> Vec<FieldElement> {
        self.values.clone()
    }
}

/// A full private assignment for one statement. Contains the secret solution
/// vector; Debug output is redacted.
#[derive(Clone, PartialEq, Eq)]
pub struct WitnessAssignment {
    params: CircuitParams,
    values: Vec<FieldElement>,
}

impl WitnessAssignment {
    pub fn params(&self) -> CircuitParams {
        self.params
    }

    pub fn values(&self) -> &[FieldElement] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn seg(&self) -> (usize, usize, usize) {
        let nx = self.params.nx() as usize;
        let chains = nx * self.params.log2_np() as usize;
        let products = (self.params.k() as usize + 1) * nx;
        (nx, chains, products)
    }

    /// The secret solution vector.
    pub fn solution(&self) -> &[FieldElement] {
        &self.values[..self.seg().0]
    }

    /// All squaring-chain wires, unknown-major: chain i holds
    /// s_i^2, s_i^4, ..., s_i^np.
    pub fn power_chains(&self) -> &[FieldElement] {
        let (nx, chains, _) = self.seg();
        &self.values[nx..nx + chains]
    }

    /// All dot-product wires, equation-major with the own equation first.
    pub fn products(&self) -> &[FieldElement] {
        let (nx, chains, products) = self.seg();
        &self.values[nx + chains..nx + chains + products]
    }

    /// The k inverse hints, one per neighbor equation.
    pub fn inverse_hints(&self) -> &[FieldElement] {
        let (nx, chains, products) = self.seg();
        &self.values[nx + chains + products..]
    }
}

impl std::fmt::Debug for WitnessAssignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "WitnessAssignment({} wires for {}, redacted)",
            self.values.len(),
            self.params
        )
    }
}

/// Computes the full satisfying assignment for `statement` under the secret
/// solution `s`, following the fixed wire layout.
///
/// Fails with [`CircuitError::OwnEquationMismatch`] when `s` does not solve
/// the own equation, and [`CircuitError::SybilCollision`] when `s` solves a
/// neighbor equation (the prover owns that neighbor pseudonym; the NotEqual
/// gadget has no satisfying hint, which is exactly the blocking behavior the
/// criterion exists for).
pub fn synthesize_witness(
    statement: &DicStatement,
    s: &Orthonym,
) -> Result<WitnessAssignment, CircuitError> {
    let params = statement.params();
    let nx = params.nx() as usize;
    let log2_np = params.log2_np();
    if s.len() != nx {
        return Err(CircuitError::Shape {
            what: "orthonym length",
            expected: nx,
            got: s.len(),
        });
    }

    let mut values = Vec::with_capacity(
        nx + nx * log2_np as usize + (params.k() as usize + 1) * nx + params.k() as usize,
    );
    values.extend_from_slice(s.elements());

    let mut powers = Vec::with_capacity(nx);
    for &si in s.elements() {
        let mut cur = si;
        for _ in 0..log2_np {
            cur = cur.square();
            values.push(cur);
        }
        powers.push(cur);
    }

    let mut equations = Vec::with_capacity(params.k() as usize + 1);
    equations.push(statement.own());
    equations.extend(statement.neighbors().iter());

    let mut sums = Vec::with_capacity(equations.len());
    for eq in &equations {
        let mut sum = FieldElement::zero();
        for (m, p) in eq.coeffs.iter().zip(&powers) {
            let prod = m.mul(*p);
            values.push(prod);
            sum = sum.add(prod);
        }
        sums.push(sum);
    }

    if sums[0] != statement.own().constant {
        return Err(CircuitError::OwnEquationMismatch);
    }
    for (j, neighbor) in statement.neighbors().iter().enumerate() {
        let gap = sums[j + 1].sub(neighbor.constant);
        match gap.inverse() {
            Some(v) => values.push(v),
            None => return Err(CircuitError::SybilCollision(j)),
        }
    }

    Ok(WitnessAssignment { params, values })
}

/// Convenience predicate mirroring the circuit's satisfiability condition
/// without building any constraints: does `s` own the statement's bundle and
/// none of its neighbors?
pub fn dic_holds(statement: &DicStatement, s: &Orthonym) -> Result<bool, CircuitError> {
    let np = statement.params().np();
    let own_ok = check_solution(statement.own(), s, np).map_err(shape_from_algebra)?;
    if !own_ok {
        return Ok(false);
    }
    for n in statement.neighbors() {
        if check_solution(n, s, np).map_err(shape_from_algebra)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn shape_from_algebra(e: crate::algebra::AlgebraError) -> CircuitError {
    match e {
        crate::algebra::AlgebraError::DimensionMismatch { expected, got } => CircuitError::Shape {
            what: "equation dimension",
            expected,
            got,
        },
        _ => CircuitError::Shape {
            what: "field encoding",
            expected: 0,
            got: 0,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{make_quiz_equation, sample_orthonym, PseudonymId};
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn params(nx: u16, np: u16, k: u16) -> CircuitParams {
        CircuitParams::new(nx, np, k).unwrap()
    }

    fn fe(v: u64) -> FieldElement {
        FieldElement::from_u64(v)
    }

    /// Statement with literal equations; pseudonym ids only disambiguate.
    fn raw_statement(
        p: CircuitParams,
        own: (Vec<u64>, FieldElement),
        neighbors: Vec<(Vec<u64>, FieldElement)>,
    ) -> DicStatement {
        let mk = |tag: u8, (coeffs, constant): (Vec<u64>, FieldElement)| QuizEquation {
            coeffs: coeffs.into_iter().map(fe).collect(),
            constant,
            pseudonym: PseudonymId::from_bytes([tag; 32]),
        };
        let own = mk(0, own);
        let neighbors = neighbors
            .into_iter()
            .enumerate()
            .map(|(i, n)| mk(i as u8 + 1, n))
            .collect();
        DicStatement::new(p, own, neighbors).unwrap()
    }

    #[test]
    fn constraint_counts_match_closed_form() {
        for (nx, np, k, want) in [(4, 8, 1, 22), (2, 2, 1, 8), (4, 8, 3, 32)] {
            let cs = build_circuit(params(nx, np, k));
            assert_eq!(cs.num_constraints(), want, "({nx},{np},{k})");
        }
    }

    #[test]
    fn counts_hold_across_grid() {
        for nx in [2u16, 4, 8, 16] {
            for np in [2u16, 4, 8, 16, 32, 64, 128, 256] {
                for k in 1u16..=8 {
                    let p = params(nx, np, k);
                    let cs = build_circuit(p);
                    let (nx, k, l) = (nx as usize, k as usize, p.log2_np() as usize);
                    assert_eq!(cs.num_constraints(), nx * l + (k + 1) * nx + 1 + k);
                    assert_eq!(cs.num_instance(), (k + 1) * (nx + 1));
                    assert_eq!(cs.num_witness(), nx + nx * l + (k + 1) * nx + k);
                }
            }
        }
    }

    #[test]
    fn pow_gadget_counts_and_rejects() {
        let mut b = CircuitBuilder::new();
        let s = b.alloc_witness();
        b.pow_gadget(s, 2).unwrap();
        assert_eq!(b.constraints.len(), 1);
        let mut b = CircuitBuilder::new();
        let s = b.alloc_witness();
        b.pow_gadget(s, 8).unwrap();
        assert_eq!(b.constraints.len(), 3);
        let mut b = CircuitBuilder::new();
        let s = b.alloc_witness();
        assert_eq!(b.pow_gadget(s, 6), Err(CircuitError::BadDegree(6)));
        assert_eq!(b.pow_gadget(s, 1), Err(CircuitError::BadDegree(1)));
    }

    #[test]
    fn dot_gadget_counts_and_rejects() {
        let mut b = CircuitBuilder::new();
        let ws: Vec<Wire> = (0..8).map(|_| b.alloc_witness()).collect();
        b.dot_gadget(&ws[..4], &ws[4..]).unwrap();
        assert_eq!(b.constraints.len(), 4);
        assert!(matches!(
            b.dot_gadget(&ws[..4], &ws[..3]),
            Err(CircuitError::Shape { .. })
        ));
    }

    #[test]
    fn power_chain_values() {
        // s_0 = 3, np = 8: chain is 9, 81, 6561.
        let p = params(2, 8, 1);
        let s = Orthonym::new(vec![fe(3), fe(1)]);
        let own = make_quiz_equation(&PseudonymId::from_bytes([1; 32]), &s, &p).unwrap();
        let other = sample_orthonym(&p, b"independent");
        let nb = make_quiz_equation(&PseudonymId::from_bytes([2; 32]), &other, &p).unwrap();
        let st = DicStatement::new(p, own, vec![nb]).unwrap();
        let w = synthesize_witness(&st, &s).unwrap();
        assert_eq!(&w.power_chains()[..3], &[fe(9), fe(81), fe(6561)]);
        assert_eq!(&w.power_chains()[3..], &[fe(1), fe(1), fe(1)]);
    }

    #[test]
    fn zero_solution_powers_to_zero() {
        let p = params(2, 2, 1);
        let st = raw_statement(p, (vec![1, 1], fe(0)), vec![(vec![1, 1], fe(5))]);
        let s = Orthonym::new(vec![fe(0), fe(0)]);
        let w = synthesize_witness(&st, &s).unwrap();
        assert!(w.power_chains().iter().all(|x| x.is_zero()));
        assert!(w.products().iter().all(|x| x.is_zero()));
    }

    #[test]
    fn dot_products_small_case() {
        // coeffs (1,2) against powers (9,16): products (9,32), sum 41.
        let p = params(2, 2, 1);
        let st = raw_statement(p, (vec![1, 2], fe(41)), vec![(vec![1, 1], fe(7))]);
        let s = Orthonym::new(vec![fe(3), fe(4)]);
        let w = synthesize_witness(&st, &s).unwrap();
        assert_eq!(&w.products()[..2], &[fe(9), fe(32)]);
        let cs = build_circuit(p);
        assert!(cs.is_satisfied(&st.instance_vector(), w.values()));
    }

    #[test]
    fn equal_gadget_is_strict() {
        let p = params(2, 2, 1);
        let ok = raw_statement(p, (vec![1, 2], fe(41)), vec![(vec![1, 1], fe(7))]);
        let bad = raw_statement(p, (vec![1, 2], fe(42)), vec![(vec![1, 1], fe(7))]);
        let s = Orthonym::new(vec![fe(3), fe(4)]);
        assert!(synthesize_witness(&ok, &s).is_ok());
        assert_eq!(
            synthesize_witness(&bad, &s),
            Err(CircuitError::OwnEquationMismatch)
        );
    }

    #[test]
    fn inverse_hint_matches_independent_oracle() {
        // Own sum is 41; neighbor has the same coefficients but constant 39,
        // so the evaluation gap is 2 and the hint must be 2^-1 mod r.
        let p = params(2, 2, 1);
        let st = raw_statement(p, (vec![1, 2], fe(41)), vec![(vec![1, 2], fe(39))]);
        let s = Orthonym::new(vec![fe(3), fe(4)]);
        let w = synthesize_witness(&st, &s).unwrap();
        let hint = w.inverse_hints()[0];
        assert_eq!(hint.mul(fe(2)), fe(1));

        let r = BigUint::parse_bytes(
            b"21888242871839275222246405745257275088548364400416034343698204186575808495617",
            10,
        )
        .unwrap();
        let inv2 = BigUint::from(2u32).modpow(&(&r - 2u32), &r);
        let got = BigUint::from_bytes_be(&hint.to_bytes());
        assert_eq!(got, inv2);
    }

    #[test]
    fn collision_reports_offending_neighbor() {
        let p = params(4, 8, 3);
        let s = sample_orthonym(&p, b"prover");
        let other = sample_orthonym(&p, b"bystander");
        let own = make_quiz_equation(&PseudonymId::from_bytes([0; 32]), &s, &p).unwrap();
        let mk = |tag: u8, sol: &Orthonym| {
            make_quiz_equation(&PseudonymId::from_bytes([tag; 32]), sol, &p).unwrap()
        };
        // Neighbor 1 is a second pseudonym of the same prover.
        let st = DicStatement::new(p, own, vec![mk(1, &other), mk(2, &s), mk(3, &other)]).unwrap();
        assert_eq!(
            synthesize_witness(&st, &s),
            Err(CircuitError::SybilCollision(1))
        );
    }

    #[test]
    fn statement_shape_validation() {
        let p = params(4, 8, 2);
        let s = sample_orthonym(&p, b"x");
        let own = make_quiz_equation(&PseudonymId::from_bytes([0; 32]), &s, &p).unwrap();
        let nb = make_quiz_equation(&PseudonymId::from_bytes([1; 32]), &s, &p).unwrap();
        assert!(matches!(
            DicStatement::new(p, own.clone(), vec![nb.clone()]),
            Err(CircuitError::Shape { .. })
        ));
        assert_eq!(
            DicStatement::new(p, own.clone(), vec![nb.clone(), own.clone()]),
            Err(CircuitError::DuplicatePseudonym(1))
        );
        let narrow = CircuitParams::new(2, 8, 1).unwrap();
        assert!(matches!(
            DicStatement::new(narrow, own, vec![nb]),
            Err(CircuitError::Shape { .. })
        ));
    }

    #[test]
    fn synthesis_agrees_with_direct_check() {
        // Randomized statements mixing honest, foreign-own, and colliding
        // neighbors: synthesize_witness succeeds exactly when the criterion
        // predicate holds, and successful assignments satisfy the circuit.
        let p = params(2, 2, 1);
        let cs = build_circuit(p);
        let mut rng = ChaCha20Rng::seed_from_u64(99);
        for t in 0u32..1000 {
            let s = sample_orthonym(&p, &t.to_be_bytes());
            let other = sample_orthonym(&p, &(t ^ 0x8000_0000).to_be_bytes());
            let own_solver = if rng.gen_bool(0.8) { &s } else { &other };
            let nb_solver = if rng.gen_bool(0.5) { &other } else { &s };
            let own = make_quiz_equation(&PseudonymId::random(&mut rng), own_solver, &p).unwrap();
            let nb = make_quiz_equation(&PseudonymId::random(&mut rng), nb_solver, &p).unwrap();
            let st = DicStatement::new(p, own, vec![nb]).unwrap();

            let expected = dic_holds(&st, &s).unwrap();
            match synthesize_witness(&st, &s) {
                Ok(w) => {
                    assert!(expected, "trial {t}: synthesized despite failing criterion");
                    let instance = st.instance_vector();
                    assert!(cs.is_satisfied(&instance, w.values()));

                    // Any single-wire corruption must break some constraint.
                    let mut broken = w.values().to_vec();
                    let idx = rng.gen_range(0..broken.len());
                    broken[idx] = broken[idx].add(fe(1));
                    assert!(
                        !cs.is_satisfied(&instance, &broken),
                        "trial {t}: corrupting wire {idx} went unnoticed"
                    );
                }
                Err(CircuitError::OwnEquationMismatch) => {
                    assert!(!check_solution(st.own(), &s, p.np()).unwrap());
                }
                Err(CircuitError::SybilCollision(j)) => {
                    assert!(check_solution(&st.neighbors()[j], &s, p.np()).unwrap());
                }
                Err(e) => panic!("trial {t}: unexpected error {e}"),
            }
        }
    }

    #[test]
    fn multi_neighbor_satisfaction() {
        for k in 1u16..=8 {
            let p = params(4, 8, k);
            let cs = build_circuit(p);
            let s = sample_orthonym(&p, b"own");
            let own = make_quiz_equation(&PseudonymId::from_bytes([0; 32]), &s, &p).unwrap();
            let neighbors = (0..k)
                .map(|j| {
                    let other = sample_orthonym(&p, &[b'n', j as u8]);
                    make_quiz_equation(&PseudonymId::from_bytes([j as u8 + 1; 32]), &other, &p)
                        .unwrap()
                })
                .collect();
            let st = DicStatement::new(p, own, neighbors).unwrap();
            let w = synthesize_witness(&st, &s).unwrap();
            assert_eq!(w.len(), cs.num_witness());
            assert!(cs.is_satisfied(&st.instance_vector(), w.values()));
        }
    }

    #[test]
    fn dump_has_one_line_per_constraint() {
        let cs = build_circuit(params(4, 8, 1));
        let dump = cs.dump();
        let mut lines = dump.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "dic-r1cs nx=4 np=8 k=1 instance=10 witness=25 constraints=22"
        );
        assert_eq!(lines.count(), 22);
    }

    proptest! {
        #[test]
        fn instance_vector_round_trips(
            nx_pow in 1u32..=4,
            np_pow in 1u32..=8,
            k in 1u16..=8,
            seed in any::<u64>(),
        ) {
            let p = params(1 << nx_pow, 1 << np_pow, k);
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let any_fe = |rng: &mut ChaCha20Rng| {
                let mut wide = [0u8; 64];
                rng.fill_bytes(&mut wide);
                FieldElement::from_wide_bytes(&wide)
            };
            let mk = |tag: u8, rng: &mut ChaCha20Rng| QuizEquation {
                coeffs: (0..p.nx()).map(|_| any_fe(rng)).collect(),
                constant: any_fe(rng),
                pseudonym: PseudonymId::from_bytes([tag; 32]),
            };
            let own = mk(0, &mut rng);
            let neighbors: Vec<_> = (0..k).map(|j| mk(j as u8 + 1, &mut rng)).collect();
            let st = DicStatement::new(p, own.clone(), neighbors.clone()).unwrap();

            let vec = st.instance_vector();
            prop_assert_eq!(vec.len(), p.instance_len());
            let parsed = DicInstance::from_vec(p, vec.clone()).unwrap();
            prop_assert_eq!(parsed.own_coeffs(), own.coeffs.as_slice());
            prop_assert_eq!(parsed.own_constant(), own.constant);
            for (j, n) in neighbors.iter().enumerate() {
                prop_assert_eq!(parsed.neighbor_coeffs(j), n.coeffs.as_slice());
                prop_assert_eq!(parsed.neighbor_constant(j), n.constant);
            }
            prop_assert_eq!(parsed.to_vec(), vec);
        }
    }
}
