//! Brute-force jet counting over small prime fields.
//!
//! A level-n jet assigns each ambient variable a polynomial of degree <= n
//! over F_q; a jet solves the problem when every equation vanishes mod
//! t^(n+1).  The t^k coefficient of an equation only involves variable
//! coefficients up to level k, so the search runs level by level with early
//! pruning, caching per-monomial partial-product series and extending each by
//! one convolution per level.
//!
//! Liftability is decided by saturation: a level-n jet is counted liftable at
//! lift level m when some level-m solution truncates to it, and the count is
//! declared stable once two consecutive lift levels agree.  Convergence
//! failures are reported, never silently accepted.
//!
//! Budgets: q must be prime and at most `max_q`; the formal search space
//! q^(vars * (level+1)) must fit the node cap; and the actual number of DFS
//! nodes visited by an operation is charged against the same cap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::mckay::{classify_arc_cyclic, ArcClass, JetCoeff};
use crate::motivic_ring::MotivicExpr;
use crate::{Error, Rational, Result};

/// An element of F_q carrying its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fp {
    value: u8,
    modulus: u8,
}

impl Fp {
    pub fn new(value: u64, q: u8) -> Fp {
        assert!(q >= 2, "modulus must be at least 2");
        Fp {
            value: (value % q as u64) as u8,
            modulus: q,
        }
    }

    pub fn value(&self) -> u8 {
        self.value
    }
}

impl JetCoeff for Fp {
    fn zero_like(&self) -> Self {
        Fp {
            value: 0,
            modulus: self.modulus,
        }
    }
    fn is_zero(&self) -> bool {
        self.value == 0
    }
    fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        Fp {
            value: (self.value + other.value) % self.modulus,
            modulus: self.modulus,
        }
    }
    fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.modulus, other.modulus);
        Fp {
            value: ((self.value as u16 * other.value as u16) % self.modulus as u16) as u8,
            modulus: self.modulus,
        }
    }
    fn neg(&self) -> Self {
        Fp {
            value: (self.modulus - self.value) % self.modulus,
            modulus: self.modulus,
        }
    }
}

/// One monomial: integer coefficient and one exponent per ambient variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: i64,
    pub exponents: Vec<u32>,
}

/// A counting problem: equations over integer coefficients, a prime q, the
/// jet level, and whether jets are pinned to the origin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetProblem {
    pub vars: Vec<String>,
    pub equations: Vec<Vec<Monomial>>,
    pub q: u64,
    pub level: u32,
    pub origin_only: bool,
}

impl JetProblem {
    pub fn new(
        vars: Vec<String>,
        equations: Vec<Vec<Monomial>>,
        q: u64,
        level: u32,
        origin_only: bool,
    ) -> Result<JetProblem> {
        let p = JetProblem {
            vars,
            equations,
            q,
            level,
            origin_only,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.vars.is_empty() {
            return Err(Error::input("at least one variable required"));
        }
        for eq in &self.equations {
            for mono in eq {
                if mono.exponents.len() != self.vars.len() {
                    return Err(Error::input(format!(
                        "monomial has {} exponents for {} variables",
                        mono.exponents.len(),
                        self.vars.len()
                    )));
                }
            }
        }
        if !is_prime(self.q) {
            return Err(Error::input(format!("q = {} is not prime", self.q)));
        }
        Ok(())
    }

    /// Expected dimension: ambient variables minus equations (the in-scope
    /// models are complete intersections).
    pub fn dimension(&self) -> i64 {
        self.vars.len() as i64 - self.equations.len() as i64
    }

    /// A copy of the problem at a different level.
    pub fn at_level(&self, level: u32) -> JetProblem {
        JetProblem {
            level,
            ..self.clone()
        }
    }
}

/// The surface model uv = w^d as the equation u*v - w^d = 0.
pub fn a_model(d: u32, q: u64, level: u32) -> Result<JetProblem> {
    if d < 2 {
        return Err(Error::input("the model needs d >= 2"));
    }
    JetProblem::new(
        vec!["u".into(), "v".into(), "w".into()],
        vec![vec![
            Monomial {
                coeff: 1,
                exponents: vec![1, 1, 0],
            },
            Monomial {
                coeff: -1,
                exponents: vec![0, 0, d],
            },
        ]],
        q,
        level,
        true,
    )
}

/// The smooth test case: the line y = 0 in the plane.
pub fn smooth_line(q: u64, level: u32) -> Result<JetProblem> {
    JetProblem::new(
        vec!["x".into(), "y".into()],
        vec![vec![Monomial {
            coeff: 1,
            exponents: vec![0, 1],
        }]],
        q,
        level,
        true,
    )
}

fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= q {
        if q.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

/// Resource limits for the oracle.
#[derive(Debug, Clone, Copy)]
pub struct JetBudget {
    /// Largest admissible prime.
    pub max_q: u64,
    /// Cap on both the formal search space at the problem's own level and
    /// the DFS nodes an operation may visit.
    pub node_cap: u128,
}

impl Default for JetBudget {
    fn default() -> JetBudget {
        JetBudget {
            max_q: 5,
            node_cap: 100_000_000,
        }
    }
}

impl JetBudget {
    fn admit(&self, p: &JetProblem) -> Result<()> {
        if p.q > self.max_q {
            return Err(Error::input(format!(
                "q = {} exceeds the configured maximum {}",
                p.q, self.max_q
            )));
        }
        let space = formal_space(p.q, p.vars.len() as u32 * (p.level + 1), self.node_cap);
        if space > self.node_cap {
            return Err(Error::BudgetExceeded {
                required: space,
                cap: self.node_cap,
            });
        }
        Ok(())
    }
}

/// q^e, saturating just above the cap.
fn formal_space(q: u64, e: u32, cap: u128) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(q as u128);
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

// ---- the enumeration engine ----

/// A monomial compiled for incremental evaluation: coefficient mod q and the
/// chain of variable indices, one entry per exponent unit.
struct CompiledMonomial {
    coeff: u8,
    chain: Vec<usize>,
    /// partials[j] holds the coefficients of the product of chain[0..=j],
    /// maintained up to the current level.
    partials: Vec<Vec<u8>>,
}

struct CompiledEq {
    monomials: Vec<CompiledMonomial>,
    /// Constant term of the equation mod q (empty-chain monomials).
    constant: u8,
}

struct Engine {
    q: u8,
    vars: usize,
    eqs: Vec<CompiledEq>,
    coeffs: Vec<Vec<u8>>, // per variable, one entry per assigned level
    nodes: u128,
    cap: u128,
}

enum Walk {
    Continue,
    Stop,
}

impl Engine {
    fn new(p: &JetProblem, cap: u128) -> Engine {
        let q = p.q as u8;
        let eqs = p
            .equations
            .iter()
            .map(|eq| {
                let mut constant = 0u8;
                let mut monomials = Vec::new();
                for mono in eq {
                    let c = mono.coeff.rem_euclid(q as i64) as u8;
                    if c == 0 {
                        continue;
                    }
                    let mut chain = Vec::new();
                    for (var, &e) in mono.exponents.iter().enumerate() {
                        for _ in 0..e {
                            chain.push(var);
                        }
                    }
                    if chain.is_empty() {
                        constant = (constant + c) % q;
                    } else {
                        let partials = vec![Vec::new(); chain.len()];
                        monomials.push(CompiledMonomial {
                            coeff: c,
                            chain,
                            partials,
                        });
                    }
                }
                CompiledEq {
                    monomials,
                    constant,
                }
            })
            .collect();
        Engine {
            q,
            vars: p.vars.len(),
            eqs,
            coeffs: vec![Vec::new(); p.vars.len()],
            nodes: 0,
            cap,
        }
    }

    /// Extend every partial-product series by the next level; the level-k
    /// variable coefficients must already be pushed.
    fn extend_partials(&mut self, k: usize) {
        let q16 = self.q as u16;
        for eq in &mut self.eqs {
            for mono in &mut eq.monomials {
                for j in 0..mono.chain.len() {
                    let var = &self.coeffs[mono.chain[j]];
                    let coeff = if j == 0 {
                        var[k]
                    } else {
                        let (done, rest) = mono.partials.split_at(j);
                        let prev = &done[j - 1];
                        let _ = rest;
                        let mut acc: u32 = 0;
                        for a in 0..=k {
                            acc += prev[a] as u32 * var[k - a] as u32;
                        }
                        (acc % q16 as u32) as u8
                    };
                    mono.partials[j].push(coeff);
                }
            }
        }
    }

    fn retract_partials(&mut self) {
        for eq in &mut self.eqs {
            for mono in &mut eq.monomials {
                for p in &mut mono.partials {
                    p.pop();
                }
            }
        }
    }

    /// Order-k coefficient of every equation must vanish.
    fn constraints_hold(&self, k: usize) -> bool {
        for eq in &self.eqs {
            let mut acc: u32 = if k == 0 { eq.constant as u32 } else { 0 };
            for mono in &eq.monomials {
                let last = mono.partials.last().expect("nonempty chain");
                acc += mono.coeff as u32 * last[k] as u32;
            }
            if !acc.is_multiple_of(self.q as u32) {
                return false;
            }
        }
        true
    }

    fn push_level(&mut self, values: &[u8]) {
        for (v, &c) in self.coeffs.iter_mut().zip(values) {
            v.push(c);
        }
        self.extend_partials(self.coeffs[0].len() - 1);
    }

    fn pop_level(&mut self) {
        for v in &mut self.coeffs {
            v.pop();
        }
        self.retract_partials();
    }

    /// Enumerate assignments of levels `from..=to`, checking constraints at
    /// each new level, and call the sink with the full coefficient table for
    /// every solution.  Level 0 is forced to zero when `origin_zero`.
    fn run<F: FnMut(&[Vec<u8>]) -> Walk>(
        &mut self,
        from: u32,
        to: u32,
        origin_zero: bool,
        sink: &mut F,
    ) -> Result<Walk> {
        if from > to {
            return Ok(sink(&self.coeffs));
        }
        let k = from;
        if k == 0 && origin_zero {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::BudgetExceeded {
                    required: self.nodes,
                    cap: self.cap,
                });
            }
            let zeros = vec![0u8; self.vars];
            self.push_level(&zeros);
            let result = if self.constraints_hold(0) {
                self.run(1, to, origin_zero, sink)?
            } else {
                Walk::Continue
            };
            self.pop_level();
            return Ok(result);
        }
        let mut values = vec![0u8; self.vars];
        loop {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::BudgetExceeded {
                    required: self.nodes,
                    cap: self.cap,
                });
            }
            self.push_level(&values);
            let verdict = if self.constraints_hold(k as usize) {
                self.run(k + 1, to, origin_zero, sink)?
            } else {
                Walk::Continue
            };
            self.pop_level();
            if let Walk::Stop = verdict {
                return Ok(Walk::Stop);
            }
            // odometer: variable 0 is the most significant digit
            let mut pos = self.vars;
            loop {
                if pos == 0 {
                    return Ok(Walk::Continue);
                }
                pos -= 1;
                values[pos] += 1;
                if values[pos] < self.q {
                    break;
                }
                values[pos] = 0;
            }
        }
    }
}

/// Number of level-`level` solutions of the problem.
pub fn count_jets(p: &JetProblem, budget: &JetBudget) -> Result<u64> {
    p.validate()?;
    budget.admit(p)?;
    let mut engine = Engine::new(p, budget.node_cap);
    let mut count = 0u64;
    engine.run(0, p.level, p.origin_only, &mut |_| {
        count += 1;
        Walk::Continue
    })?;
    Ok(count)
}

/// The level-`level` solutions themselves, one coefficient row per variable.
fn enumerate_jets(p: &JetProblem, budget: &JetBudget) -> Result<(Vec<Vec<Vec<u8>>>, u128)> {
    p.validate()?;
    budget.admit(p)?;
    let mut engine = Engine::new(p, budget.node_cap);
    let mut jets = Vec::new();
    engine.run(0, p.level, p.origin_only, &mut |coeffs| {
        jets.push(coeffs.to_vec());
        Walk::Continue
    })?;
    Ok((jets, engine.nodes))
}

/// Whether a level-n solution extends to a level-m solution.  The prefix is
/// replayed without enumeration; only levels n+1..=m are searched.
fn lifts_to(
    p: &JetProblem,
    jet: &[Vec<u8>],
    m: u32,
    cap: u128,
    spent: &mut u128,
) -> Result<bool> {
    let mut engine = Engine::new(p, cap.saturating_sub(*spent));
    for k in 0..=(p.level as usize) {
        let values: Vec<u8> = jet.iter().map(|row| row[k]).collect();
        engine.push_level(&values);
        debug_assert!(engine.constraints_hold(k), "prefix must be a solution");
    }
    let mut found = false;
    let outcome = engine.run(p.level + 1, m, p.origin_only, &mut |_| {
        found = true;
        Walk::Stop
    });
    *spent += engine.nodes;
    outcome?;
    Ok(found)
}

/// Cardinality of the image of the level-m solution set under truncation to
/// the problem's level.
pub fn count_liftable_jets(p: &JetProblem, lift_level: u32, budget: &JetBudget) -> Result<u64> {
    if lift_level < p.level {
        return Err(Error::input("lift level must be at least the jet level"));
    }
    let (jets, mut spent) = enumerate_jets(p, budget)?;
    let mut count = 0u64;
    for jet in &jets {
        if lifts_to(p, jet, lift_level, budget.node_cap, &mut spent)? {
            count += 1;
        }
    }
    Ok(count)
}

/// A stabilized lift count.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Saturation {
    /// The stable count.
    pub count: u64,
    /// First lift level whose count equals the next level's.
    pub stable_m: u32,
    /// DFS nodes spent across the whole saturation.
    pub nodes: u128,
}

/// Raise the lift level until two consecutive counts agree.  Jets that fail
/// to lift at some level are dropped from later tests (liftability is
/// monotone in the lift level).
pub fn saturate(p: &JetProblem, cap_m: u32, budget: &JetBudget) -> Result<Saturation> {
    if cap_m < p.level {
        return Err(Error::input("lift-level cap below the jet level"));
    }
    let (mut survivors, mut spent) = enumerate_jets(p, budget)?;
    let mut previous = survivors.len() as u64;
    let mut m = p.level;
    while m < cap_m {
        m += 1;
        let mut still = Vec::with_capacity(survivors.len());
        for jet in survivors {
            if lifts_to(p, &jet, m, budget.node_cap, &mut spent)? {
                still.push(jet);
            }
        }
        survivors = still;
        let current = survivors.len() as u64;
        if current == previous {
            return Ok(Saturation {
                count: current,
                stable_m: m - 1,
                nodes: spent,
            });
        }
        previous = current;
    }
    Err(Error::NoConvergence {
        cap_m,
        last: previous,
    })
}

/// Saturated survivors at the problem's level, with the saturation summary.
fn saturated_jets(
    p: &JetProblem,
    cap_m: u32,
    budget: &JetBudget,
) -> Result<(Vec<Vec<Vec<u8>>>, Saturation)> {
    let sat = saturate(p, cap_m, budget)?;
    let (jets, mut spent) = enumerate_jets(p, budget)?;
    let mut survivors = Vec::new();
    for jet in jets {
        if lifts_to(p, &jet, sat.stable_m, budget.node_cap, &mut spent)? {
            survivors.push(jet);
        }
    }
    debug_assert_eq!(survivors.len() as u64, sat.count);
    Ok((survivors, sat))
}

/// Default lift-level cap: generous headroom above the jet level.
pub fn default_lift_cap(level: u32) -> u32 {
    2 * level + 8
}

/// Partition of the saturated liftable jets of the uv = w^d model by arc
/// class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassPartition {
    pub by_class: BTreeMap<u64, u64>,
    pub indeterminate: u64,
    pub saturation: Saturation,
}

impl ClassPartition {
    pub fn total(&self) -> u64 {
        self.indeterminate + self.by_class.values().sum::<u64>()
    }
}

/// Saturate the uv = w^d model at the given level and classify every
/// surviving jet.
pub fn class_partition_counts(
    d: u32,
    q: u64,
    level: u32,
    budget: &JetBudget,
) -> Result<ClassPartition> {
    let p = a_model(d, q, level)?;
    let (jets, saturation) = saturated_jets(&p, default_lift_cap(level), budget)?;
    let mut by_class: BTreeMap<u64, u64> = BTreeMap::new();
    let mut indeterminate = 0u64;
    let qf = q as u8;
    for jet in &jets {
        let series: Vec<Vec<Fp>> = jet
            .iter()
            .map(|row| row.iter().map(|&c| Fp::new(c as u64, qf)).collect())
            .collect();
        let outcome = classify_arc_cyclic(
            d as u64,
            &series[0],
            &series[1],
            &series[2],
            level as usize,
        )?;
        match outcome {
            ArcClass::Class(e) => *by_class.entry(e).or_insert(0) += 1,
            ArcClass::Indeterminate => indeterminate += 1,
        }
    }
    Ok(ClassPartition {
        by_class,
        indeterminate,
        saturation,
    })
}

// ---- count table ----

/// One row of the count table.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JetCountRow {
    pub level: u32,
    pub lift_level: u32,
    pub raw: u64,
    pub liftable: u64,
    /// Class buckets, keyed by the exponent (plus "indeterminate"); empty
    /// when classification was not requested.
    pub per_class: BTreeMap<String, u64>,
    /// liftable * q^(-dim*(level+1)), exact.
    pub normalized: String,
}

/// Saturated counts per level with normalizations.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct JetCountTable {
    pub q: u64,
    pub dim: i64,
    pub rows: Vec<JetCountRow>,
}

impl JetCountTable {
    /// Aligned text rendering.
    pub fn to_text(&self) -> String {
        let mut out = format!("q = {}, dim = {}\n", self.q, self.dim);
        let header = ["level", "lift_level", "raw", "liftable", "normalized"];
        let mut rows: Vec<Vec<String>> = Vec::new();
        for r in &self.rows {
            rows.push(vec![
                r.level.to_string(),
                r.lift_level.to_string(),
                r.raw.to_string(),
                r.liftable.to_string(),
                r.normalized.clone(),
            ]);
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &rows {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.len());
            }
        }
        let render = |cells: &[String]| -> String {
            cells
                .iter()
                .enumerate()
                .map(|(i, c)| format!("{c:>width$}", width = widths[i]))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let header_cells: Vec<String> = header.iter().map(|h| h.to_string()).collect();
        out.push_str(&render(&header_cells));
        out.push('\n');
        for (row, r) in rows.iter().zip(&self.rows) {
            out.push_str(&render(row));
            if !r.per_class.is_empty() {
                let buckets: Vec<String> = r
                    .per_class
                    .iter()
                    .map(|(k, v)| format!("{k}:{v}"))
                    .collect();
                out.push_str(&format!("  [{}]", buckets.join(", ")));
            }
            out.push('\n');
        }
        out
    }
}

/// Exact q^(-dim*(level+1)) * count as a rational string.
fn normalized_count(count: u64, q: u64, dim: i64, level: u32) -> String {
    let e = dim * (level as i64 + 1);
    let expr = MotivicExpr::l_power(-e).scale(&Rational::from(num::BigInt::from(count)));
    expr.point_count_realize(q)
        .expect("integer exponents evaluate everywhere")
        .to_string()
}

/// Build the table for levels 0..=p.level: per level, the raw count, the
/// saturated liftable count, the normalization, and (when `classify_d` is
/// given) the class partition.
pub fn jet_count_table(
    p: &JetProblem,
    classify_d: Option<u32>,
    budget: &JetBudget,
) -> Result<JetCountTable> {
    let dim = p.dimension();
    let mut rows = Vec::new();
    for level in 0..=p.level {
        let pl = p.at_level(level);
        let raw = count_jets(&pl, budget)?;
        let (saturation, per_class) = match classify_d {
            Some(d) => {
                let partition = class_partition_counts(d, p.q, level, budget)?;
                let mut map: BTreeMap<String, u64> = partition
                    .by_class
                    .iter()
                    .map(|(k, v)| (k.to_string(), *v))
                    .collect();
                map.insert("indeterminate".to_string(), partition.indeterminate);
                (partition.saturation, map)
            }
            None => (
                saturate(&pl, default_lift_cap(level), budget)?,
                BTreeMap::new(),
            ),
        };
        rows.push(JetCountRow {
            level,
            lift_level: saturation.stable_m,
            raw,
            liftable: saturation.count,
            per_class,
            normalized: normalized_count(saturation.count, p.q, dim, level),
        });
    }
    Ok(JetCountTable {
        q: p.q,
        dim,
        rows,
    })
}

/// A stored oracle run: the problem plus the table it produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetFixture {
    pub problem: JetProblem,
    pub table: JetCountTable,
}
