//! Finite matrix groups over cyclotomic fields.
//!
//! A group is generated from a `GroupSpec` (dimension, entry conductor, and
//! generator matrices) by breadth-first closure under multiplication, with a
//! cap guarding against infinite input.  On top of the element list:
//! conjugacy classes, centralizers, element orders, eigenvalue exponents, and
//! the weight function
//!
//!   w(g) = (e_1 + ... + e_n) / d,   d = |G|,  1 <= e_i <= d,
//!
//! where the e_i are the exponents of the eigenvalues of g as powers of the
//! fixed primitive d-th root of unity and the eigenvalue 1 is reported as
//! exponent d.  Multiplicities come from exact kernel dimensions, so no
//! polynomial factorization is involved.

use std::collections::HashMap;

use crate::cyclotomic::{kernel_dimension, parse_rational, CycMatrix, CycNum};
use crate::{Error, Rational, Result};

fn gcd64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd64(b, a % b)
    }
}

fn lcm64(a: u64, b: u64) -> u64 {
    a / gcd64(a, b) * b
}

/// Default closure cap for group generation.
pub const DEFAULT_GROUP_CAP: usize = 10_000;

/// Whether every element has determinant 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// All determinants are 1.
    Sl,
    /// Some determinant differs from 1.
    Gl,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Sl => write!(f, "SL"),
            Mode::Gl => write!(f, "GL"),
        }
    }
}

/// Generators for a finite matrix group: dimension, entry conductor, and the
/// generating matrices.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    n: usize,
    root_order: u64,
    generators: Vec<CycMatrix>,
}

impl GroupSpec {
    pub fn new(n: usize, root_order: u64, generators: Vec<CycMatrix>) -> Result<GroupSpec> {
        if n == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        if root_order == 0 {
            return Err(Error::input("root_order must be positive"));
        }
        for g in &generators {
            if g.size() != n {
                return Err(Error::input(format!(
                    "generator is {}x{}, expected {n}x{n}",
                    g.size(),
                    g.size()
                )));
            }
            for e in g.entries() {
                if !root_order.is_multiple_of(e.conductor()) {
                    return Err(Error::input(format!(
                        "entry conductor {} does not divide root_order {root_order}",
                        e.conductor()
                    )));
                }
            }
        }
        Ok(GroupSpec {
            n,
            root_order,
            generators,
        })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    pub fn generators(&self) -> &[CycMatrix] {
        &self.generators
    }
}

mod spec_serde {
    use super::*;
    use serde::de::Error as DeError;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct SpecJson {
        n: usize,
        root_order: u64,
        generators: Vec<Vec<Vec<Vec<String>>>>,
    }

    impl Serialize for GroupSpec {
        fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
            let generators = self
                .generators
                .iter()
                .map(|m| {
                    let m = m.embed(self.root_order);
                    (0..m.size())
                        .map(|i| {
                            (0..m.size())
                                .map(|j| {
                                    m.get(i, j).coeffs().iter().map(|c| c.to_string()).collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect();
            SpecJson {
                n: self.n,
                root_order: self.root_order,
                generators,
            }
            .serialize(serializer)
        }
    }

    impl<'de> Deserialize<'de> for GroupSpec {
        fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
            let raw = SpecJson::deserialize(deserializer)?;
            let mut generators = Vec::with_capacity(raw.generators.len());
            for rows in raw.generators {
                let mut matrix_rows = Vec::with_capacity(rows.len());
                for row in rows {
                    let mut entries = Vec::with_capacity(row.len());
                    for coeffs in row {
                        if coeffs.len() as u64 > raw.root_order {
                            return Err(D::Error::custom(
                                "coefficient list longer than root_order",
                            ));
                        }
                        let parsed: std::result::Result<Vec<Rational>, _> =
                            coeffs.iter().map(|s| parse_rational(s)).collect();
                        let parsed = parsed.map_err(|e| D::Error::custom(e.to_string()))?;
                        entries.push(CycNum::from_coeffs(raw.root_order, parsed));
                    }
                    matrix_rows.push(entries);
                }
                let m = CycMatrix::from_rows(matrix_rows)
                    .map_err(|e| D::Error::custom(e.to_string()))?;
                generators.push(m);
            }
            GroupSpec::new(raw.n, raw.root_order, generators)
                .map_err(|e| D::Error::custom(e.to_string()))
        }
    }
}

/// A finite matrix group: the closed element list plus lookup structures.
/// Element 0 is the identity.  Immutable once built; queries are pure.
#[derive(Debug, Clone)]
pub struct Group {
    n: usize,
    root_order: u64,
    elements: Vec<CycMatrix>,
    key_index: HashMap<String, usize>,
    inverses: Vec<usize>,
    mode: Mode,
}

/// Canonical hash key; every entry must already be at the same conductor.
fn matrix_key(m: &CycMatrix) -> String {
    let mut s = String::new();
    for e in m.entries() {
        for c in e.coeffs() {
            s.push_str(&c.to_string());
            s.push(',');
        }
        s.push(';');
    }
    s
}

impl Group {
    /// Breadth-first closure of the generators under multiplication.
    /// Fails once more than `cap` distinct elements appear.
    pub fn generate(spec: &GroupSpec, cap: usize) -> Result<Group> {
        let n = spec.n;
        let d0 = spec.root_order;
        let gens: Vec<CycMatrix> = spec.generators.iter().map(|g| g.embed(d0)).collect();
        for g in &gens {
            g.inverse().map_err(|_| Error::SingularGenerator)?;
        }
        let identity = CycMatrix::identity(n).embed(d0);
        let mut elements = vec![identity];
        let mut key_index = HashMap::new();
        key_index.insert(matrix_key(&elements[0]), 0usize);
        let mut frontier = 0usize;
        while frontier < elements.len() {
            let current = elements[frontier].clone();
            frontier += 1;
            for g in &gens {
                let prod = current.mul(g).embed(d0);
                let key = matrix_key(&prod);
                if let std::collections::hash_map::Entry::Vacant(e) = key_index.entry(key) {
                    if elements.len() >= cap {
                        return Err(Error::GroupTooLarge(cap));
                    }
                    e.insert(elements.len());
                    elements.push(prod);
                }
            }
        }
        let mut inverses = Vec::with_capacity(elements.len());
        for e in &elements {
            let inv = e.inverse().map_err(|_| Error::SingularGenerator)?.embed(d0);
            let idx = key_index.get(&matrix_key(&inv)).ok_or(Error::NotInGroup)?;
            inverses.push(*idx);
        }
        let one = CycNum::one();
        let mode = if elements.iter().all(|e| e.determinant() == one) {
            Mode::Sl
        } else {
            Mode::Gl
        };
        Ok(Group {
            n,
            root_order: d0,
            elements,
            key_index,
            inverses,
            mode,
        })
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn root_order(&self) -> u64 {
        self.root_order
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn element(&self, i: usize) -> &CycMatrix {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[CycMatrix] {
        &self.elements
    }

    /// Index of a matrix in the element list, if present.
    pub fn index_of(&self, m: &CycMatrix) -> Option<usize> {
        if m.entries()
            .iter()
            .any(|e| !self.root_order.is_multiple_of(e.conductor()))
        {
            return None;
        }
        self.key_index.get(&matrix_key(&m.embed(self.root_order))).copied()
    }

    /// Product in index space.
    pub fn mul(&self, i: usize, j: usize) -> usize {
        let prod = self.elements[i].mul(&self.elements[j]).embed(self.root_order);
        *self
            .key_index
            .get(&matrix_key(&prod))
            .expect("group is closed under multiplication")
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.inverses[i]
    }

    /// Multiplicative order of element i.
    pub fn element_order(&self, i: usize) -> u64 {
        let mut k = 1u64;
        let mut cur = i;
        while cur != 0 {
            cur = self.mul(cur, i);
            k += 1;
        }
        k
    }

    /// lcm of all element orders.
    pub fn exponent(&self) -> u64 {
        (0..self.order()).fold(1, |acc, i| lcm64(acc, self.element_order(i)))
    }

    /// The subgroup {h : hg = gh}, returned as a full Group.
    pub fn centralizer(&self, i: usize) -> Result<Group> {
        if i >= self.order() {
            return Err(Error::NotInGroup);
        }
        let members: Vec<CycMatrix> = (0..self.order())
            .filter(|&h| self.mul(h, i) == self.mul(i, h))
            .map(|h| self.elements[h].clone())
            .collect();
        let spec = GroupSpec::new(self.n, self.root_order, members)?;
        Group::generate(&spec, self.order())
    }

    /// Conjugation orbits, ordered by first appearance of the representative.
    /// The identity class comes first.
    pub fn conjugacy_classes(&self) -> Vec<ConjClass> {
        let order = self.order();
        let mut assigned = vec![false; order];
        let mut classes = Vec::new();
        for g in 0..order {
            if assigned[g] {
                continue;
            }
            let mut members = Vec::new();
            for h in 0..order {
                let conj = self.mul(self.mul(h, g), self.inverses[h]);
                if !assigned[conj] {
                    assigned[conj] = true;
                    members.push(conj);
                }
            }
            members.sort_unstable();
            let exponents = self.eigen_exponents(g);
            let weight = self.weight(g);
            classes.push(ConjClass {
                representative: g,
                members,
                exponents,
                weight,
            });
        }
        classes
    }

    /// Exponent multiset of the eigenvalues of element i as powers of the
    /// fixed primitive d-th root of unity, d = |G|.  Entries lie in 1..=d and
    /// the eigenvalue 1 is reported as d.
    pub fn eigen_exponents(&self, i: usize) -> Vec<u64> {
        self.eigen_exponents_mod(i, self.order() as u64)
            .expect("element order divides the group order")
    }

    /// Same with an explicit modulus, which must be a multiple of the
    /// element's order.
    pub fn eigen_exponents_mod(&self, i: usize, d: u64) -> Result<Vec<u64>> {
        let ord = self.element_order(i);
        if d == 0 || !d.is_multiple_of(ord) {
            return Err(Error::input(format!(
                "modulus {d} is not a multiple of the element order {ord}"
            )));
        }
        let g = &self.elements[i];
        let step = d / ord;
        let mut exponents = Vec::with_capacity(self.n);
        for k in 1..=ord {
            let e = k * step;
            // xi_d^e is the canonical primitive root of the reduced conductor
            let shared = gcd64(e, d);
            let conductor = d / shared;
            let power = e / shared;
            let target = lcm64(self.root_order, conductor);
            let lambda = CycNum::primitive_root(conductor)
                .pow(power as i64)
                .expect("positive power of a root of unity")
                .embed(target);
            let shifted = g
                .embed(target)
                .sub(&CycMatrix::diagonal(vec![lambda; self.n]));
            let mult = kernel_dimension(&shifted);
            for _ in 0..mult {
                exponents.push(e);
            }
        }
        assert_eq!(
            exponents.len(),
            self.n,
            "eigenvalue multiplicities must sum to the dimension"
        );
        exponents.sort_unstable();
        Ok(exponents)
    }

    /// w(g) = (sum of eigenvalue exponents) / |G|.
    pub fn weight(&self, i: usize) -> Rational {
        let d = self.order() as u64;
        let total: u64 = self.eigen_exponents(i).iter().sum();
        Rational::new(total.into(), d.into())
    }

    /// Weight recomputed with an explicit modulus.
    pub fn weight_mod(&self, i: usize, d: u64) -> Result<Rational> {
        let total: u64 = self.eigen_exponents_mod(i, d)?.iter().sum();
        Ok(Rational::new(total.into(), d.into()))
    }

    /// Dimension of the fixed space of element i.
    pub fn fixed_space_dimension(&self, i: usize) -> usize {
        let id = CycMatrix::identity(self.n).embed(self.root_order);
        kernel_dimension(&self.elements[i].sub(&id))
    }
}

/// One conjugation orbit with its eigenvalue data.
#[derive(Debug, Clone)]
pub struct ConjClass {
    /// Index of the first member found (the class representative).
    pub representative: usize,
    /// Sorted element indices.
    pub members: Vec<usize>,
    /// Eigenvalue exponents of the representative, modulus |G|.
    pub exponents: Vec<u64>,
    /// Weight of the representative.
    pub weight: Rational,
}

impl ConjClass {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Render a matrix on one line: rows of entries in xi-polynomial form.
pub fn matrix_display(m: &CycMatrix) -> String {
    let mut out = String::from("[");
    for i in 0..m.size() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for j in 0..m.size() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&m.get(i, j).to_string());
        }
        out.push(']');
    }
    out.push(']');
    out
}

// ---- built-in catalog ----

fn root_power(d: u64, k: u64) -> CycNum {
    CycNum::primitive_root(d)
        .pow((k % d) as i64)
        .expect("positive power of a root of unity")
}

fn cyclic_spec(d: u64, exponents: &[u64]) -> Result<GroupSpec> {
    if d == 0 {
        return Err(Error::input("cyclic order must be positive"));
    }
    let diag: Vec<CycNum> = exponents.iter().map(|&a| root_power(d, a)).collect();
    GroupSpec::new(exponents.len(), d, vec![CycMatrix::diagonal(diag)])
}

fn binary_dihedral_spec(m: u64) -> Result<GroupSpec> {
    if m < 2 {
        return Err(Error::input("binary-dihedral index must be at least 2"));
    }
    let a = CycMatrix::diagonal(vec![root_power(2 * m, 1), root_power(2 * m, 2 * m - 1)]);
    let b = CycMatrix::from_rows(vec![
        vec![CycNum::zero(), CycNum::one()],
        vec![CycNum::from_integer(-1), CycNum::zero()],
    ])?;
    GroupSpec::new(2, 2 * m, vec![a, b])
}

/// The quaternion (1 + i + j + k)/2 as a 2x2 matrix over Q(xi_d), d divisible
/// by 4: [[(1+i)/2, (1+i)/2], [(-1+i)/2, (1-i)/2]].
fn binary_tetra_extra(d: u64) -> CycMatrix {
    let half = CycNum::from_rational(Rational::new(1.into(), 2.into()));
    let i = root_power(d, d / 4);
    let one = CycNum::one();
    let p = one.add(&i).mul(&half); // (1+i)/2
    let q = i.sub(&one).mul(&half); // (-1+i)/2
    let r = one.sub(&i).mul(&half); // (1-i)/2
    CycMatrix::from_rows(vec![vec![p.clone(), p], vec![q, r]]).expect("square by construction")
}

fn binary_tetrahedral_spec() -> Result<GroupSpec> {
    let s = CycMatrix::diagonal(vec![root_power(4, 1), root_power(4, 3)]);
    GroupSpec::new(2, 4, vec![s, binary_tetra_extra(4)])
}

fn binary_octahedral_spec() -> Result<GroupSpec> {
    let s = CycMatrix::diagonal(vec![root_power(8, 1), root_power(8, 7)]);
    GroupSpec::new(2, 8, vec![s, binary_tetra_extra(8)])
}

fn binary_icosahedral_spec() -> Result<GroupSpec> {
    let e = |k: u64| root_power(5, k);
    let s = CycMatrix::diagonal(vec![e(3), e(2)]);
    // 1/sqrt(5) = (e - e^2 - e^3 + e^4)/5
    let inv_sqrt5 = e(1)
        .sub(&e(2))
        .sub(&e(3))
        .add(&e(4))
        .mul(&CycNum::from_rational(Rational::new(1.into(), 5.into())));
    let t = CycMatrix::from_rows(vec![
        vec![e(4).sub(&e(1)), e(2).sub(&e(3))],
        vec![e(2).sub(&e(3)), e(1).sub(&e(4))],
    ])?
    .scale(&inv_sqrt5);
    GroupSpec::new(2, 5, vec![s, t])
}

/// Resolve a built-in group identifier.
///
/// Recognized: `cyclic:d`, `cyclic:d:a1,...,an`, `binary-dihedral:m`,
/// `binary-tetrahedral`, `binary-octahedral`, `binary-icosahedral`.
pub fn catalog_group(id: &str) -> Result<GroupSpec> {
    let parts: Vec<&str> = id.split(':').collect();
    match parts.as_slice() {
        ["cyclic", d] => {
            let d: u64 = d
                .parse()
                .map_err(|_| Error::input(format!("bad cyclic order `{d}`")))?;
            if d == 0 {
                return Err(Error::input("cyclic order must be positive"));
            }
            cyclic_spec(d, &[1, d - 1])
        }
        ["cyclic", d, weights] => {
            let d: u64 = d
                .parse()
                .map_err(|_| Error::input(format!("bad cyclic order `{d}`")))?;
            if d == 0 {
                return Err(Error::input("cyclic order must be positive"));
            }
            let exps: std::result::Result<Vec<u64>, _> =
                weights.split(',').map(|w| w.trim().parse()).collect();
            let exps = exps.map_err(|_| Error::input(format!("bad weight list `{weights}`")))?;
            if exps.is_empty() {
                return Err(Error::input("weight list must be nonempty"));
            }
            cyclic_spec(d, &exps)
        }
        ["binary-dihedral", m] => {
            let m: u64 = m
                .parse()
                .map_err(|_| Error::input(format!("bad dihedral index `{m}`")))?;
            binary_dihedral_spec(m)
        }
        ["binary-tetrahedral"] => binary_tetrahedral_spec(),
        ["binary-octahedral"] => binary_octahedral_spec(),
        ["binary-icosahedral"] => binary_icosahedral_spec(),
        _ => Err(Error::UnknownCatalog(id.to_string())),
    }
}

/// Identifier patterns understood by `catalog_group`.
pub fn catalog_group_ids() -> Vec<&'static str> {
    vec![
        "cyclic:<d>",
        "cyclic:<d>:<a1,...,an>",
        "binary-dihedral:<m>",
        "binary-tetrahedral",
        "binary-octahedral",
        "binary-icosahedral",
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generate(id: &str) -> Group {
        Group::generate(&catalog_group(id).unwrap(), DEFAULT_GROUP_CAP).unwrap()
    }

    #[test]
    fn minus_identity_generates_order_two() {
        let spec = cyclic_spec(2, &[1, 1]).unwrap();
        let g = Group::generate(&spec, 100).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.mode(), Mode::Sl);
    }

    #[test]
    fn cyclic_three_closure_and_classes() {
        let g = generate("cyclic:3");
        assert_eq!(g.order(), 3);
        assert_eq!(g.mode(), Mode::Sl);
        let classes = g.conjugacy_classes();
        assert_eq!(classes.len(), 3);
        assert!(classes.iter().all(|c| c.size() == 1));
    }

    #[test]
    fn trivial_group_in_dimension_two() {
        let g = generate("cyclic:1");
        assert_eq!(g.order(), 1);
        assert_eq!(g.dimension(), 2);
    }

    #[test]
    fn binary_polyhedral_orders_and_class_counts() {
        for (id, order, classes) in [
            ("binary-tetrahedral", 24, 7),
            ("binary-octahedral", 48, 8),
            ("binary-icosahedral", 120, 9),
        ] {
            let g = generate(id);
            assert_eq!(g.order(), order, "{id}");
            assert_eq!(g.mode(), Mode::Sl, "{id}");
            assert_eq!(g.conjugacy_classes().len(), classes, "{id}");
        }
    }

    #[test]
    fn binary_dihedral_orders_and_class_counts() {
        for m in 2..6u64 {
            let g = generate(&format!("binary-dihedral:{m}"));
            assert_eq!(g.order(), 4 * m as usize);
            assert_eq!(g.mode(), Mode::Sl);
            assert_eq!(g.conjugacy_classes().len(), m as usize + 3);
        }
    }

    #[test]
    fn class_equation_and_centralizers() {
        let g = generate("binary-tetrahedral");
        let mut total = 0;
        for class in g.conjugacy_classes() {
            let centralizer = g.centralizer(class.representative).unwrap();
            assert_eq!(class.size() * centralizer.order(), g.order());
            total += class.size();
        }
        assert_eq!(total, g.order());
        // an order-4 element sits in a class of size 6
        let order4 = (0..g.order()).find(|&i| g.element_order(i) == 4).unwrap();
        assert_eq!(g.centralizer(order4).unwrap().order(), 4);
    }

    #[test]
    fn centralizer_of_identity_is_whole_group() {
        let g = generate("binary-dihedral:2");
        assert_eq!(g.centralizer(0).unwrap().order(), g.order());
    }

    #[test]
    fn eigen_exponent_examples() {
        let g = generate("cyclic:2");
        assert_eq!(g.eigen_exponents(0), vec![2, 2]);
        let minus = (0..2).find(|&i| i != 0).unwrap();
        assert_eq!(g.eigen_exponents(minus), vec![1, 1]);

        let z3 = Group::generate(&cyclic_spec(3, &[1, 1, 1]).unwrap(), 100).unwrap();
        let gen = z3
            .index_of(&CycMatrix::diagonal(vec![root_power(3, 1); 3]))
            .unwrap();
        assert_eq!(z3.eigen_exponents(gen), vec![1, 1, 1]);
    }

    #[test]
    fn weight_examples() {
        let two = Rational::new(2.into(), 1.into());
        let g = generate("cyclic:2");
        assert_eq!(g.weight(0), two);
        let minus = 1;
        assert_eq!(g.weight(minus), Rational::new(1.into(), 1.into()));

        let z3 = Group::generate(&cyclic_spec(3, &[2, 2, 2]).unwrap(), 100).unwrap();
        let gen = z3
            .index_of(&CycMatrix::diagonal(vec![root_power(3, 2); 3]))
            .unwrap();
        assert_eq!(z3.weight(gen), two);
        assert_eq!(z3.weight(0), Rational::new(3.into(), 1.into()));
    }

    #[test]
    fn weight_is_a_class_function() {
        let g = generate("binary-tetrahedral");
        for class in g.conjugacy_classes() {
            for &m in &class.members {
                assert_eq!(g.weight(m), class.weight);
            }
        }
    }

    #[test]
    fn weight_pairing_with_inverse() {
        let g = generate("binary-octahedral");
        let n = Rational::new(2.into(), 1.into());
        for i in 0..g.order() {
            let paired = g.weight(i) + g.weight(g.inverse(i));
            let fixed = Rational::new((g.fixed_space_dimension(i) as i64).into(), 1.into());
            assert_eq!(paired, &n + fixed);
        }
    }

    #[test]
    fn weight_invariant_under_modulus_scaling() {
        let g = generate("binary-dihedral:3");
        let exponent = g.exponent();
        for i in 0..g.order() {
            let base = g.weight(i);
            for k in [1u64, 2, 3] {
                assert_eq!(g.weight_mod(i, k * exponent).unwrap(), base);
            }
        }
    }

    #[test]
    fn eigen_exponents_scale_with_modulus() {
        let g = generate("cyclic:4");
        let d = g.order() as u64;
        for i in 0..g.order() {
            let base = g.eigen_exponents(i);
            let doubled = g.eigen_exponents_mod(i, 2 * d).unwrap();
            let scaled: Vec<u64> = base.iter().map(|e| 2 * e).collect();
            assert_eq!(doubled, scaled);
        }
    }

    #[test]
    fn modulus_must_cover_element_order() {
        let g = generate("binary-icosahedral");
        let order4 = (0..g.order()).find(|&i| g.element_order(i) == 4).unwrap();
        assert!(g.eigen_exponents_mod(order4, 5).is_err());
    }

    #[test]
    fn gl_mode_detected() {
        let g = generate("cyclic:3:1,1");
        assert_eq!(g.mode(), Mode::Gl);
        assert_eq!(g.order(), 3);
    }

    #[test]
    fn closure_cap_is_enforced() {
        let spec = catalog_group("cyclic:12").unwrap();
        assert!(matches!(
            Group::generate(&spec, 5),
            Err(Error::GroupTooLarge(5))
        ));
        // infinite group: a unipotent shear never closes
        let shear = CycMatrix::from_rows(vec![
            vec![CycNum::one(), CycNum::one()],
            vec![CycNum::zero(), CycNum::one()],
        ])
        .unwrap();
        let spec = GroupSpec::new(2, 1, vec![shear]).unwrap();
        assert!(matches!(
            Group::generate(&spec, 200),
            Err(Error::GroupTooLarge(200))
        ));
    }

    #[test]
    fn singular_generator_rejected() {
        let zero = CycMatrix::zero(2);
        let spec = GroupSpec::new(2, 1, vec![zero]).unwrap();
        assert!(matches!(
            Group::generate(&spec, 10),
            Err(Error::SingularGenerator)
        ));
    }

    #[test]
    fn spec_round_trips_through_json() {
        for id in [
            "cyclic:5",
            "cyclic:6:1,2,3",
            "binary-dihedral:3",
            "binary-tetrahedral",
            "binary-icosahedral",
        ] {
            let spec = catalog_group(id).unwrap();
            let json = serde_json::to_string(&spec).unwrap();
            let back: GroupSpec = serde_json::from_str(&json).unwrap();
            assert_eq!(back.dimension(), spec.dimension());
            assert_eq!(back.root_order(), spec.root_order());
            let a = Group::generate(&spec, DEFAULT_GROUP_CAP).unwrap();
            let b = Group::generate(&back, DEFAULT_GROUP_CAP).unwrap();
            assert_eq!(a.order(), b.order());
        }
    }

    #[test]
    fn unknown_catalog_id_errors() {
        assert!(matches!(
            catalog_group("icosahedral"),
            Err(Error::UnknownCatalog(_))
        ));
        assert!(catalog_group("cyclic:0").is_err());
        assert!(catalog_group("binary-dihedral:1").is_err());
    }

    #[test]
    fn element_orders_divide_group_order() {
        let g = generate("binary-icosahedral");
        let orders: std::collections::BTreeSet<u64> =
            (0..g.order()).map(|i| g.element_order(i)).collect();
        assert!(orders.iter().all(|o| 120 % o == 0));
        assert!(orders.contains(&10));
        assert_eq!(g.exponent(), 60);
    }
}
