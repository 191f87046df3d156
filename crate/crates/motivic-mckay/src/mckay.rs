//! The group side of the correspondence: orbifold measure sums over
//! conjugacy classes, per-class measures, the assembled report, and arc
//! classification for the cyclic family.
//!
//! For a finite G in GL_n with classes Conj(G) and weight function w, the
//! orbifold sum is sum over classes of L^(-w(gamma)); the fiber sum is
//! L^n times that.  In SL mode all exponents are integers; in GL mode the
//! result carries grain |G|.
//!
//! Arc classification covers X = A^2/Z_d with the action (xi, xi^(d-1)):
//! invariant coordinates u = x^d, v = y^d, w = xy with the single relation
//! uv = w^d.  A jet of (u, v, w) through the origin lifts to x = t^(e/d)p(t),
//! y = t^((d-e)/d)r(t), so ord_t(u) determines e mod d.

use crate::finite_group::{matrix_display, Group, Mode};
use crate::motivic_ring::{HodgeExpr, MotivicExpr};
use crate::{Error, Rational, Result};

/// Sum of L^(-w(gamma)) over the conjugacy classes.  GL-mode results carry
/// grain |G|.
pub fn orbifold_sum(g: &Group) -> MotivicExpr {
    let mut sum = MotivicExpr::zero();
    for class in g.conjugacy_classes() {
        sum = sum.add(&MotivicExpr::l_power_rational(-class.weight.clone()));
    }
    if g.mode() == Mode::Gl {
        sum.with_grain(g.order() as u64)
            .expect("weight denominators divide the group order")
    } else {
        sum
    }
}

/// Sum of L^(n - w(gamma)) over the conjugacy classes: equals
/// L^n * orbifold_sum and, for crepant cases, the fiber class over 0.
pub fn fiber_sum(g: &Group) -> MotivicExpr {
    MotivicExpr::l_power(g.dimension() as i64).mul(&orbifold_sum(g))
}

/// Measure of the class piece of element i: L^(-w).
pub fn per_class_measure(g: &Group, i: usize) -> Result<MotivicExpr> {
    if i >= g.order() {
        return Err(Error::NotInGroup);
    }
    Ok(MotivicExpr::l_power_rational(-g.weight(i)))
}

/// Order in t acquired by dx_1 ^ ... ^ dx_n under the diagonal substitution
/// x_i -> t^(e_i/d) x_i, read off the diagonal entries directly.  Element i
/// must be a diagonal matrix.
pub fn diagonal_pullback_order(g: &Group, i: usize) -> Result<Rational> {
    if i >= g.order() {
        return Err(Error::NotInGroup);
    }
    let m = g.element(i);
    let n = m.size();
    for r in 0..n {
        for c in 0..n {
            if r != c && !m.get(r, c).is_zero() {
                return Err(Error::input("element is not diagonal"));
            }
        }
    }
    let d = g.order() as u64;
    let root = crate::cyclotomic::CycNum::primitive_root(d);
    let mut total = 0u64;
    for r in 0..n {
        let entry = m.get(r, r);
        // each diagonal monomial x_r contributes e_r/d, with eigenvalue 1
        // counted as e = d
        let mut found = None;
        let mut power = root.clone();
        for e in 1..=d {
            if power == *entry {
                found = Some(e);
                break;
            }
            power = power.mul(&root);
        }
        let e = found.ok_or_else(|| Error::input("diagonal entry is not a d-th root of unity"))?;
        total += e;
    }
    Ok(Rational::new(total.into(), d.into()))
}

// ---- arc classification for the cyclic family ----

/// Coefficient arithmetic needed for truncated power series, implemented by
/// exact rationals and by prime fields.  The zero constructor is an instance
/// method so that field elements can carry their modulus.
pub trait JetCoeff: Clone {
    fn zero_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl JetCoeff for Rational {
    fn zero_like(&self) -> Self {
        num::traits::Zero::zero()
    }
    fn is_zero(&self) -> bool {
        num::traits::Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
}

/// Outcome of arc classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ArcClass {
    /// The class exponent e in 1..=d.
    Class(u64),
    /// The order of u is not visible at this truncation.
    Indeterminate,
}

impl std::fmt::Display for ArcClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArcClass::Class(e) => write!(f, "{e}"),
            ArcClass::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

fn coefficient<C: JetCoeff>(series: &[C], i: usize, zero: &C) -> C {
    series.get(i).cloned().unwrap_or_else(|| zero.clone())
}

fn mul_truncated<C: JetCoeff>(a: &[C], b: &[C], len: usize, zero: &C) -> Vec<C> {
    let mut out = vec![zero.clone(); len];
    for (i, ai) in a.iter().enumerate().take(len) {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate().take(len - i) {
            out[i + j] = out[i + j].add(&ai.mul(bj));
        }
    }
    out
}

/// Classify a jet of the invariant triple (u, v, w) on uv = w^d through the
/// origin, truncated at level n: returns the exponent class of ord_t(u)
/// in 1..=d, or Indeterminate when u vanishes to order > n.
pub fn classify_arc_cyclic<C: JetCoeff>(
    d: u64,
    u: &[C],
    v: &[C],
    w: &[C],
    n: usize,
) -> Result<ArcClass> {
    if d < 2 {
        return Err(Error::input("cyclic order must be at least 2"));
    }
    let Some(witness) = [u, v, w].iter().find_map(|s| s.first().cloned()) else {
        // every series is identically zero at this truncation
        return Ok(ArcClass::Indeterminate);
    };
    let zero = witness.zero_like();
    let len = n + 1;
    for (name, series) in [("u", u), ("v", v), ("w", w)] {
        if !coefficient(series, 0, &zero).is_zero() {
            return Err(Error::input(format!(
                "jet must pass through the origin: {name} has a constant term"
            )));
        }
    }
    // relation check: uv - w^d must vanish mod t^(n+1)
    let uv = mul_truncated(&u[..u.len().min(len)], &v[..v.len().min(len)], len, &zero);
    let wd = pow_truncated(&w[..w.len().min(len)], d, len, &zero);
    for i in 0..len {
        let diff = uv[i].add(&wd[i].neg());
        if !diff.is_zero() {
            return Err(Error::input(format!(
                "jet violates uv = w^{d} at order {i}"
            )));
        }
    }
    let ord = (0..len).find(|&i| !coefficient(u, i, &zero).is_zero());
    match ord {
        None => Ok(ArcClass::Indeterminate),
        Some(o) => {
            let e = (o as u64) % d;
            Ok(ArcClass::Class(if e == 0 { d } else { e }))
        }
    }
}

/// base^k truncated to len coefficients, k >= 1.
fn pow_truncated<C: JetCoeff>(base: &[C], k: u64, len: usize, zero: &C) -> Vec<C> {
    assert!(k >= 1, "power must be positive");
    let mut acc = base.to_vec();
    acc.resize(len, zero.clone());
    acc.truncate(len);
    for _ in 1..k {
        acc = mul_truncated(&acc, base, len, zero);
    }
    acc
}

/// Rational coefficient vector from integers, for hand-written jets.
pub fn rational_jet(coeffs: &[i64]) -> Vec<Rational> {
    coeffs
        .iter()
        .map(|&c| Rational::from(num::BigInt::from(c)))
        .collect()
}

// ---- assembled report ----

/// One conjugacy class in the report.
#[derive(Debug, Clone)]
pub struct ClassRow {
    pub representative: String,
    pub size: usize,
    pub exponents: Vec<u64>,
    pub weight: Rational,
    pub measure: MotivicExpr,
}

/// Everything the group side yields: class table, measure and fiber sums,
/// and their realizations.
#[derive(Debug, Clone)]
pub struct McKayReport {
    pub order: usize,
    pub mode: Mode,
    pub dimension: usize,
    pub class_count: usize,
    pub rows: Vec<ClassRow>,
    pub measure_sum: MotivicExpr,
    pub fiber_sum: MotivicExpr,
    pub euler: Rational,
    pub hodge: HodgeExpr,
}

impl McKayReport {
    pub fn build(g: &Group) -> McKayReport {
        let classes = g.conjugacy_classes();
        let rows: Vec<ClassRow> = classes
            .iter()
            .map(|c| ClassRow {
                representative: matrix_display(g.element(c.representative)),
                size: c.size(),
                exponents: c.exponents.clone(),
                weight: c.weight.clone(),
                measure: MotivicExpr::l_power_rational(-c.weight.clone()),
            })
            .collect();
        let measure_sum = orbifold_sum(g);
        let fiber = fiber_sum(g);
        let euler = fiber.euler_realize();
        let hodge = fiber.hodge_realize();
        McKayReport {
            order: g.order(),
            mode: g.mode(),
            dimension: g.dimension(),
            class_count: classes.len(),
            rows,
            measure_sum,
            fiber_sum: fiber,
            euler,
            hodge,
        }
    }

    /// Aligned text table plus the summary lines.
    pub fn to_text(&self) -> String {
        let header = vec![
            "class".to_string(),
            "size".to_string(),
            "weight".to_string(),
            "exponents".to_string(),
            "measure".to_string(),
            "representative".to_string(),
        ];
        let mut body: Vec<Vec<String>> = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            let exps = row
                .exponents
                .iter()
                .map(|e| e.to_string())
                .collect::<Vec<_>>()
                .join(",");
            body.push(vec![
                (i + 1).to_string(),
                row.size.to_string(),
                row.weight.to_string(),
                format!("{{{exps}}}"),
                row.measure.to_string(),
                row.representative.clone(),
            ]);
        }
        let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
        for row in &body {
            for (c, cell) in row.iter().enumerate() {
                widths[c] = widths[c].max(cell.len());
            }
        }
        let render_row = |cells: &[String], widths: &[usize]| {
            let mut line = String::new();
            for (c, cell) in cells.iter().enumerate() {
                if c > 0 {
                    line.push_str("  ");
                }
                if c + 1 == cells.len() {
                    line.push_str(cell);
                } else {
                    line.push_str(&format!("{cell:<width$}", width = widths[c]));
                }
            }
            line
        };
        let mut out = format!(
            "group: order {}, mode {}, dimension {}, classes {}\n",
            self.order, self.mode, self.dimension, self.class_count
        );
        out.push_str(&render_row(&header, &widths));
        out.push('\n');
        for row in &body {
            out.push_str(&render_row(row, &widths));
            out.push('\n');
        }
        out.push_str(&format!("measure_sum: {}\n", self.measure_sum));
        out.push_str(&format!("fiber_sum:   {}\n", self.fiber_sum));
        out
    }
}

mod report_serde {
    use super::*;
    use serde::ser::SerializeStruct;
    use serde::{Serialize, Serializer};

    impl Serialize for McKayReport {
        fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
            #[derive(Serialize)]
            struct RowJson<'a> {
                representative: &'a str,
                size: usize,
                exponents: &'a [u64],
                weight: String,
                measure: &'a MotivicExpr,
            }
            let rows: Vec<RowJson> = self
                .rows
                .iter()
                .map(|r| RowJson {
                    representative: &r.representative,
                    size: r.size,
                    exponents: &r.exponents,
                    weight: r.weight.to_string(),
                    measure: &r.measure,
                })
                .collect();
            let mut s = serializer.serialize_struct("McKayReport", 9)?;
            s.serialize_field("order", &self.order)?;
            s.serialize_field("mode", &self.mode.to_string())?;
            s.serialize_field("dimension", &self.dimension)?;
            s.serialize_field("class_count", &self.class_count)?;
            s.serialize_field("classes", &rows)?;
            s.serialize_field("measure_sum", &self.measure_sum)?;
            s.serialize_field("fiber_sum", &self.fiber_sum)?;
            s.serialize_field("euler", &self.euler.to_string())?;
            s.serialize_field("hodge", &self.hodge.to_string())?;
            s.end()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::{catalog_group, Group, DEFAULT_GROUP_CAP};

    fn generate(id: &str) -> Group {
        Group::generate(&catalog_group(id).unwrap(), DEFAULT_GROUP_CAP).unwrap()
    }

    fn expr(s: &str) -> MotivicExpr {
        s.parse().unwrap()
    }

    #[test]
    fn orbifold_sum_examples() {
        assert!(orbifold_sum(&generate("cyclic:2")).expr_eq(&expr("L^(-1) + L^(-2)")));
        assert!(orbifold_sum(&generate("cyclic:3:1,1,1"))
            .expr_eq(&expr("L^(-1) + L^(-2) + L^(-3)")));
        assert!(orbifold_sum(&generate("cyclic:1")).expr_eq(&expr("L^(-2)")));
    }

    #[test]
    fn fiber_sum_examples() {
        assert!(fiber_sum(&generate("cyclic:3:1,1,1")).expr_eq(&expr("L^2 + L + 1")));
        for d in 2..7i64 {
            let g = generate(&format!("cyclic:{d}"));
            let want = MotivicExpr::lefschetz()
                .scale(&Rational::new((d - 1).into(), 1.into()))
                .add(&MotivicExpr::one());
            assert!(fiber_sum(&g).expr_eq(&want), "d = {d}");
        }
        assert!(fiber_sum(&generate("cyclic:1")).expr_eq(&MotivicExpr::one()));
    }

    #[test]
    fn fiber_sum_is_shifted_orbifold_sum() {
        for id in ["cyclic:4", "binary-dihedral:3", "binary-tetrahedral"] {
            let g = generate(id);
            let shifted = MotivicExpr::l_power(g.dimension() as i64).mul(&orbifold_sum(&g));
            assert!(fiber_sum(&g).expr_eq(&shifted), "{id}");
        }
    }

    #[test]
    fn per_class_measure_examples() {
        let g = generate("cyclic:2");
        assert!(per_class_measure(&g, 0).unwrap().expr_eq(&expr("L^(-2)")));
        assert!(per_class_measure(&g, 1).unwrap().expr_eq(&expr("L^(-1)")));
        let t = generate("binary-tetrahedral");
        for class in t.conjugacy_classes() {
            let rep = per_class_measure(&t, class.representative).unwrap();
            for &m in &class.members {
                assert!(per_class_measure(&t, m).unwrap().expr_eq(&rep));
            }
        }
    }

    #[test]
    fn gl_mode_orbifold_sum_has_fractional_exponents() {
        let g = generate("cyclic:3:1,1");
        let sum = orbifold_sum(&g);
        assert!(sum.expr_eq(&expr("L^(-2/3) + L^(-4/3) + L^(-2)")));
        assert_eq!(sum.grain(), 3);
        for t in sum.terms() {
            let den = t.exponent().denom();
            assert_eq!(3 % den_to_u64(den), 0);
        }
    }

    fn den_to_u64(d: &num::BigInt) -> u64 {
        use num::ToPrimitive;
        d.to_u64().unwrap()
    }

    #[test]
    fn euler_counts_classes() {
        for id in ["cyclic:5", "binary-dihedral:4", "binary-tetrahedral"] {
            let g = generate(id);
            let classes = g.conjugacy_classes().len() as i64;
            assert_eq!(
                fiber_sum(&g).euler_realize(),
                Rational::new(classes.into(), 1.into()),
                "{id}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        let jet = |coeffs: &[i64]| rational_jet(coeffs);
        // (t, t, t) at d=2: ord u = 1
        let r = classify_arc_cyclic(2, &jet(&[0, 1]), &jet(&[0, 1]), &jet(&[0, 1]), 2).unwrap();
        assert_eq!(r, ArcClass::Class(1));
        // (t^2, t^4, t^3) at d=2: ord u = 2, identity class
        let r = classify_arc_cyclic(
            2,
            &jet(&[0, 0, 1]),
            &jet(&[0, 0, 0, 0, 1]),
            &jet(&[0, 0, 0, 1]),
            6,
        )
        .unwrap();
        assert_eq!(r, ArcClass::Class(2));
        // (t^4, t^2, t^2) at d=3: ord u = 4 = 1 mod 3
        let r = classify_arc_cyclic(
            3,
            &jet(&[0, 0, 0, 0, 1]),
            &jet(&[0, 0, 1]),
            &jet(&[0, 0, 1]),
            6,
        )
        .unwrap();
        assert_eq!(r, ArcClass::Class(1));
    }

    #[test]
    fn classify_indeterminate_when_u_vanishes() {
        let zero = rational_jet(&[0, 0, 0]);
        let r = classify_arc_cyclic(2, &zero, &zero, &zero, 2).unwrap();
        assert_eq!(r, ArcClass::Indeterminate);
    }

    #[test]
    fn classify_validates_the_relation_and_origin() {
        let jet = rational_jet;
        // uv != w^d at order 2
        assert!(classify_arc_cyclic(2, &jet(&[0, 1]), &jet(&[0, 1]), &jet(&[0, 0, 1]), 2).is_err());
        // constant term present
        assert!(classify_arc_cyclic(2, &jet(&[1, 1]), &jet(&[0, 1]), &jet(&[0, 1]), 1).is_err());
        // d too small
        assert!(classify_arc_cyclic(1, &jet(&[0, 1]), &jet(&[0, 1]), &jet(&[0, 1]), 1).is_err());
    }

    #[test]
    fn classify_stable_under_refinement() {
        // u = t^2 * (1 + t)^2, v = t^4, w = t^3 * (1 + t): uv = w^2
        let u = rational_jet(&[0, 0, 1, 2, 1]);
        let v = rational_jet(&[0, 0, 0, 0, 1]);
        let w = rational_jet(&[0, 0, 0, 1, 1]);
        let coarse = classify_arc_cyclic(2, &u, &v, &w, 4).unwrap();
        let fine = classify_arc_cyclic(2, &u, &v, &w, 8).unwrap();
        assert_eq!(coarse, ArcClass::Class(2));
        assert_eq!(coarse, fine);
    }

    #[test]
    fn pullback_order_matches_weight_for_diagonal_elements() {
        for id in ["cyclic:5", "cyclic:6:1,5", "cyclic:3:1,1"] {
            let g = generate(id);
            for i in 0..g.order() {
                assert_eq!(
                    diagonal_pullback_order(&g, i).unwrap(),
                    g.weight(i),
                    "{id} element {i}"
                );
            }
        }
    }

    #[test]
    fn pullback_order_rejects_non_diagonal() {
        let g = generate("binary-dihedral:2");
        let non_diag = (0..g.order())
            .find(|&i| {
                let m = g.element(i);
                (0..2).any(|r| (0..2).any(|c| r != c && !m.get(r, c).is_zero()))
            })
            .unwrap();
        assert!(diagonal_pullback_order(&g, non_diag).is_err());
    }

    #[test]
    fn report_is_complete_and_serializable() {
        let g = generate("cyclic:2");
        let report = McKayReport::build(&g);
        assert_eq!(report.class_count, 2);
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.euler, Rational::new(2.into(), 1.into()));
        let text = report.to_text();
        assert!(text.contains("order 2"));
        assert!(text.contains("measure_sum"));
        assert!(text.contains("L^(-1) + L^(-2)"));
        let json = serde_json::to_string_pretty(&report).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["class_count"], 2);
        assert_eq!(parsed["classes"].as_array().unwrap().len(), 2);
        assert_eq!(parsed["hodge"], "1 + uv");
    }
}
