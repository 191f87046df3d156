//! The resolution side: declarative exceptional-divisor data and the measure
//! formula
//!
//!   L^(-dim) * sum over subsets I of [E_I degrees] * prod_{i in I} (L-1)/(L^(nu_i)-1),
//!
//! where the strata map assigns each subset of components the class of its
//! locally closed piece of the fiber (absent subsets contribute 0).  All
//! stratum classes are polynomials in L; anything else is a schema error.
//!
//! The built-in catalog pairs each resolution with its group: the cyclic
//! chains A:d, the forked trees D:m, the exceptional trees E6/E7/E8 (vertex
//! class L + 1 - degree, edge class 1, all nu = 1), and the hard-coded
//! three-fold entry Z3:111 whose fiber is the plane with its toric boundary.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::finite_group::{catalog_group, Group, GroupSpec, Mode};
use crate::motivic_ring::MotivicExpr;
use crate::{Error, Result};

/// One exceptional component: an identifier and its nu value (nu - 1 is the
/// discrepancy along the component; nu = 1 on every component means crepant).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub nu: u32,
}

/// One stratum: the subset of components whose locus it refines, and its
/// class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Stratum {
    pub subset: Vec<String>,
    pub class: MotivicExpr,
}

/// Declarative resolution data: dimension, components, strata map.
#[derive(Debug, Clone, Serialize)]
pub struct ResolutionData {
    dim: u32,
    components: Vec<Component>,
    strata: Vec<Stratum>,
}

impl ResolutionData {
    pub fn new(
        dim: u32,
        components: Vec<Component>,
        strata: Vec<(Vec<String>, MotivicExpr)>,
    ) -> Result<ResolutionData> {
        let strata = strata
            .into_iter()
            .map(|(subset, class)| Stratum { subset, class })
            .collect();
        let data = ResolutionData {
            dim,
            components,
            strata,
        };
        data.validated()
    }

    fn validated(mut self) -> Result<ResolutionData> {
        if self.dim == 0 {
            return Err(Error::input("dimension must be positive"));
        }
        let ids: Vec<&str> = self.components.iter().map(|c| c.id.as_str()).collect();
        {
            let mut seen = BTreeSet::new();
            for id in &ids {
                if !seen.insert(*id) {
                    return Err(Error::input(format!("duplicate component id `{id}`")));
                }
            }
        }
        if let Some(c) = self.components.iter().find(|c| c.nu == 0) {
            return Err(Error::input(format!(
                "component `{}` has nu = 0; nu must be at least 1",
                c.id
            )));
        }
        let position = |id: &str| ids.iter().position(|x| *x == id);
        let mut seen_subsets = BTreeSet::new();
        for stratum in &mut self.strata {
            let mut indices = Vec::with_capacity(stratum.subset.len());
            for id in &stratum.subset {
                match position(id) {
                    Some(i) => indices.push(i),
                    None => {
                        return Err(Error::input(format!(
                            "stratum references undeclared component `{id}`"
                        )))
                    }
                }
            }
            indices.sort_unstable();
            if indices.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input("stratum subset repeats a component"));
            }
            if !seen_subsets.insert(indices.clone()) {
                return Err(Error::input("duplicate stratum subset"));
            }
            stratum.subset = indices
                .iter()
                .map(|&i| self.components[i].id.clone())
                .collect();
            if !stratum.class.is_l_polynomial() {
                return Err(Error::input(
                    "stratum class must be a polynomial in L (nonnegative integer exponents, no factors)",
                ));
            }
        }
        // canonical order: by subset size, then by component positions
        let key = |s: &Stratum| -> (usize, Vec<usize>) {
            let ix: Vec<usize> = s.subset.iter().map(|id| position(id).unwrap()).collect();
            (ix.len(), ix)
        };
        self.strata.sort_by_key(|a| key(a));
        Ok(self)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    pub fn is_crepant(&self) -> bool {
        self.components.iter().all(|c| c.nu == 1)
    }

    fn nu_of(&self, id: &str) -> u32 {
        self.components
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.nu)
            .expect("validated subset ids")
    }

    /// The measure formula: L^(-dim) * sum_I class_I * prod_{i in I}
    /// (L-1)/(L^(nu_i)-1).
    pub fn gorenstein_measure(&self) -> MotivicExpr {
        let mut sum = MotivicExpr::zero();
        for stratum in &self.strata {
            let factors: Vec<u32> = stratum.subset.iter().map(|id| self.nu_of(id)).collect();
            let weight = MotivicExpr::term(
                crate::Rational::from(num::BigInt::from(1)),
                crate::Rational::from(num::BigInt::from(0)),
                &factors,
            );
            sum = sum.add(&stratum.class.mul(&weight));
        }
        MotivicExpr::l_power(-(self.dim as i64)).mul(&sum)
    }

    /// Total fiber class sum_I class_I; defined only for crepant data.
    pub fn crepant_fiber_class(&self) -> Result<MotivicExpr> {
        if !self.is_crepant() {
            return Err(Error::NotCrepant);
        }
        let mut sum = MotivicExpr::zero();
        for stratum in &self.strata {
            sum = sum.add(&stratum.class);
        }
        Ok(sum)
    }
}

impl<'de> Deserialize<'de> for ResolutionData {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: u32,
            components: Vec<Component>,
            strata: Vec<Stratum>,
        }
        let raw = Raw::deserialize(deserializer)?;
        ResolutionData {
            dim: raw.dim,
            components: raw.components,
            strata: raw.strata,
        }
        .validated()
        .map_err(serde::de::Error::custom)
    }
}

/// Result of comparing the two sides of the correspondence.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub holds: bool,
    pub lhs: MotivicExpr,
    pub rhs: MotivicExpr,
}

/// Compare gorenstein_measure(res) with orbifold_sum(g).  The dimensions
/// must match and the group must be special linear.
pub fn check_mckay_identity(res: &ResolutionData, g: &Group) -> Result<CheckOutcome> {
    if res.dim as usize != g.dimension() {
        return Err(Error::DimensionMismatch(res.dim, g.dimension()));
    }
    if g.mode() != Mode::Sl {
        return Err(Error::NotSpecialLinear);
    }
    let lhs = res.gorenstein_measure();
    let rhs = crate::mckay::orbifold_sum(g);
    let holds = lhs.expr_eq(&rhs);
    Ok(CheckOutcome { holds, lhs, rhs })
}

/// The minimal resolution of the cyclic surface singularity of order d: a
/// chain of d-1 projective lines.  End components contribute class L,
/// interior ones L-1, adjacent pairs a point each.
pub fn toric_cyclic_2d(d: u64) -> Result<ResolutionData> {
    if d < 2 {
        return Err(Error::input("cyclic order must be at least 2"));
    }
    let r = (d - 1) as usize;
    let components: Vec<Component> = (1..=r)
        .map(|i| Component {
            id: format!("E{i}"),
            nu: 1,
        })
        .collect();
    let mut strata = Vec::new();
    if r == 1 {
        strata.push((
            vec!["E1".to_string()],
            MotivicExpr::lefschetz().add(&MotivicExpr::one()),
        ));
    } else {
        for i in 1..=r {
            let class = if i == 1 || i == r {
                MotivicExpr::lefschetz()
            } else {
                MotivicExpr::lefschetz().sub(&MotivicExpr::one())
            };
            strata.push((vec![format!("E{i}")], class));
        }
        for i in 1..r {
            strata.push((
                vec![format!("E{i}"), format!("E{}", i + 1)],
                MotivicExpr::one(),
            ));
        }
    }
    ResolutionData::new(2, components, strata)
}

/// A catalog entry: the group and its resolution data.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub group: GroupSpec,
    pub resolution: ResolutionData,
}

/// Resolution data from a tree: vertex i gets class L + 1 - deg(i), each
/// edge a point, all nu = 1.
fn tree_resolution(vertices: usize, edges: &[(usize, usize)]) -> ResolutionData {
    let mut degree = vec![0u32; vertices + 1];
    for &(a, b) in edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let components: Vec<Component> = (1..=vertices)
        .map(|i| Component {
            id: format!("E{i}"),
            nu: 1,
        })
        .collect();
    let mut strata = Vec::new();
    for (i, &deg) in degree.iter().enumerate().skip(1) {
        let class = MotivicExpr::lefschetz()
            .add(&MotivicExpr::one())
            .sub(&MotivicExpr::constant(crate::Rational::from(
                num::BigInt::from(deg as i64),
            )));
        strata.push((vec![format!("E{i}")], class));
    }
    for &(a, b) in edges {
        strata.push((
            vec![format!("E{a}"), format!("E{b}")],
            MotivicExpr::one(),
        ));
    }
    ResolutionData::new(2, components, strata).expect("tree data is well-formed")
}

/// Chain edges 1-2-...-r.
fn path_edges(r: usize) -> Vec<(usize, usize)> {
    (1..r).map(|i| (i, i + 1)).collect()
}

/// D-type tree on r vertices: leaves 1 and 2 joined to 3, then a chain.
fn d_type_edges(r: usize) -> Vec<(usize, usize)> {
    let mut edges = vec![(1, 3), (2, 3)];
    for i in 3..r {
        edges.push((i, i + 1));
    }
    edges
}

/// E-type tree: a path of r-1 vertices with vertex r attached to the third.
fn e_type_edges(r: usize) -> Vec<(usize, usize)> {
    let mut edges = path_edges(r - 1);
    edges.push((3, r));
    edges
}

/// The hard-coded three-fold entry: the fiber is the projective plane,
/// stratified by its toric boundary triangle.
fn z3_entry() -> Result<CatalogEntry> {
    let ids = ["E1", "E2", "E3"];
    let components: Vec<Component> = ids
        .iter()
        .map(|id| Component {
            id: id.to_string(),
            nu: 1,
        })
        .collect();
    let l = MotivicExpr::lefschetz;
    let one = MotivicExpr::one;
    // (L-1)^2 off the triangle, L-1 on each line, a point on each pairwise
    // intersection; total 1 + L + L^2
    let two = crate::Rational::from(num::BigInt::from(2));
    let mut strata: Vec<(Vec<String>, MotivicExpr)> = vec![(
        Vec::new(),
        l().mul(&l()).sub(&l().scale(&two)).add(&one()),
    )];
    for id in ids {
        strata.push((vec![id.to_string()], l().sub(&one())));
    }
    for (a, b) in [("E1", "E2"), ("E1", "E3"), ("E2", "E3")] {
        strata.push((vec![a.to_string(), b.to_string()], one()));
    }
    Ok(CatalogEntry {
        group: catalog_group("cyclic:3:1,1,1")?,
        resolution: ResolutionData::new(3, components, strata)?,
    })
}

/// Resolve a built-in catalog identifier to its group and resolution data.
///
/// Recognized: `A:<d>` (d >= 2), `D:<m>` (m >= 2), `E6`, `E7`, `E8`, and
/// `Z3:111`.
pub fn ade_catalog(name: &str) -> Result<CatalogEntry> {
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["A", d] => {
            let d: u64 = d
                .parse()
                .map_err(|_| Error::input(format!("bad chain length `{d}`")))?;
            Ok(CatalogEntry {
                group: catalog_group(&format!("cyclic:{d}"))?,
                resolution: toric_cyclic_2d(d)?,
            })
        }
        ["D", m] => {
            let m: u64 = m
                .parse()
                .map_err(|_| Error::input(format!("bad index `{m}`")))?;
            if m < 2 {
                return Err(Error::input("D-type index must be at least 2"));
            }
            let r = (m + 2) as usize;
            Ok(CatalogEntry {
                group: catalog_group(&format!("binary-dihedral:{m}"))?,
                resolution: tree_resolution(r, &d_type_edges(r)),
            })
        }
        ["E6"] => Ok(CatalogEntry {
            group: catalog_group("binary-tetrahedral")?,
            resolution: tree_resolution(6, &e_type_edges(6)),
        }),
        ["E7"] => Ok(CatalogEntry {
            group: catalog_group("binary-octahedral")?,
            resolution: tree_resolution(7, &e_type_edges(7)),
        }),
        ["E8"] => Ok(CatalogEntry {
            group: catalog_group("binary-icosahedral")?,
            resolution: tree_resolution(8, &e_type_edges(8)),
        }),
        ["Z3", "111"] => z3_entry(),
        _ => Err(Error::UnknownCatalog(name.to_string())),
    }
}

/// Identifier patterns understood by `ade_catalog`.
pub fn catalog_ids() -> Vec<&'static str> {
    vec!["A:<d>", "D:<m>", "E6", "E7", "E8", "Z3:111"]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_group::DEFAULT_GROUP_CAP;

    fn expr(s: &str) -> MotivicExpr {
        s.parse().unwrap()
    }

    fn a1_data() -> ResolutionData {
        ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 1,
            }],
            vec![(vec!["E1".into()], expr("L + 1"))],
        )
        .unwrap()
    }

    #[test]
    fn smooth_point_measure() {
        for d in 1..5u32 {
            let data = ResolutionData::new(d, vec![], vec![(vec![], expr("1"))]).unwrap();
            assert!(data
                .gorenstein_measure()
                .expr_eq(&MotivicExpr::l_power(-(d as i64))));
        }
    }

    #[test]
    fn a1_measure_and_fiber() {
        let data = a1_data();
        assert!(data.gorenstein_measure().expr_eq(&expr("L^(-1) + L^(-2)")));
        assert!(data.crepant_fiber_class().unwrap().expr_eq(&expr("L + 1")));
    }

    #[test]
    fn chain_measures() {
        for d in 2..9u64 {
            let data = toric_cyclic_2d(d).unwrap();
            let want = expr(&format!("{}*L^(-1) + L^(-2)", d - 1));
            assert!(data.gorenstein_measure().expr_eq(&want), "d = {d}");
            let fiber = expr(&format!("{}*L + 1", d - 1));
            assert!(data.crepant_fiber_class().unwrap().expr_eq(&fiber));
        }
    }

    #[test]
    fn toric_chain_strata_shape() {
        let data = toric_cyclic_2d(5).unwrap();
        let singles: Vec<String> = data
            .strata()
            .iter()
            .filter(|s| s.subset.len() == 1)
            .map(|s| s.class.to_string())
            .collect();
        assert_eq!(singles, vec!["L", "L - 1", "L - 1", "L"]);
        let pairs = data.strata().iter().filter(|s| s.subset.len() == 2).count();
        assert_eq!(pairs, 3);
    }

    #[test]
    fn identity_holds_for_a1_and_fails_when_perturbed() {
        let g = Group::generate(
            &catalog_group("cyclic:2").unwrap(),
            DEFAULT_GROUP_CAP,
        )
        .unwrap();
        let ok = check_mckay_identity(&a1_data(), &g).unwrap();
        assert!(ok.holds);
        let perturbed = ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 2,
            }],
            vec![
                (vec![], expr("1")),
                (vec!["E1".into()], expr("L + 1")),
            ],
        )
        .unwrap();
        let bad = check_mckay_identity(&perturbed, &g).unwrap();
        assert!(!bad.holds);
        // (L+1)(L-1)/(L^2-1) collapses to 1, so the whole sum is 2*L^(-2)
        assert!(bad.lhs.expr_eq(&expr("2*L^(-2)")));
        assert!(bad.rhs.expr_eq(&expr("L^(-1) + L^(-2)")));
    }

    #[test]
    fn identity_preconditions() {
        let g3 = Group::generate(
            &catalog_group("cyclic:3:1,1,1").unwrap(),
            DEFAULT_GROUP_CAP,
        )
        .unwrap();
        assert!(matches!(
            check_mckay_identity(&a1_data(), &g3),
            Err(Error::DimensionMismatch(2, 3))
        ));
        let gl = Group::generate(&catalog_group("cyclic:3:1,1").unwrap(), DEFAULT_GROUP_CAP)
            .unwrap();
        assert!(matches!(
            check_mckay_identity(&a1_data(), &gl),
            Err(Error::NotSpecialLinear)
        ));
    }

    #[test]
    fn crepant_fiber_requires_crepant_data() {
        let data = ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 2,
            }],
            vec![(vec!["E1".into()], expr("L + 1"))],
        )
        .unwrap();
        assert!(matches!(
            data.crepant_fiber_class(),
            Err(Error::NotCrepant)
        ));
        let point = ResolutionData::new(2, vec![], vec![(vec![], expr("1"))]).unwrap();
        assert!(point.crepant_fiber_class().unwrap().expr_eq(&expr("1")));
    }

    #[test]
    fn catalog_entries_are_consistent() {
        let e6 = ade_catalog("E6").unwrap();
        let g = Group::generate(&e6.group, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 24);
        assert!(e6
            .resolution
            .crepant_fiber_class()
            .unwrap()
            .expr_eq(&expr("6*L + 1")));

        let a2 = ade_catalog("A:2").unwrap();
        let direct = toric_cyclic_2d(2).unwrap();
        assert_eq!(
            serde_json::to_value(&a2.resolution).unwrap(),
            serde_json::to_value(&direct).unwrap()
        );

        assert!(matches!(
            ade_catalog("F4"),
            Err(Error::UnknownCatalog(_))
        ));
    }

    #[test]
    fn z3_entry_strata_sum_to_the_plane() {
        let entry = ade_catalog("Z3:111").unwrap();
        assert_eq!(entry.resolution.dim(), 3);
        let fiber = entry.resolution.crepant_fiber_class().unwrap();
        assert!(fiber.expr_eq(&expr("L^2 + L + 1")));
        let g = Group::generate(&entry.group, DEFAULT_GROUP_CAP).unwrap();
        let outcome = check_mckay_identity(&entry.resolution, &g).unwrap();
        assert!(outcome.holds);
    }

    #[test]
    fn measure_is_additive_under_stratum_splitting() {
        let direct = ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 3,
            }],
            vec![(vec!["E1".into()], expr("L + 1"))],
        )
        .unwrap();
        let split = ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 3,
            }],
            vec![(vec!["E1".into()], expr("L - 4 + 5"))],
        )
        .unwrap();
        assert!(direct
            .gorenstein_measure()
            .expr_eq(&split.gorenstein_measure()));
    }

    #[test]
    fn fiber_equals_shifted_measure_for_crepant_data() {
        for name in ["A:4", "D:3", "E7", "Z3:111"] {
            let entry = ade_catalog(name).unwrap();
            let fiber = entry.resolution.crepant_fiber_class().unwrap();
            let shifted = MotivicExpr::l_power(entry.resolution.dim() as i64)
                .mul(&entry.resolution.gorenstein_measure());
            assert!(fiber.expr_eq(&shifted), "{name}");
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        for name in ["A:5", "D:2", "E8", "Z3:111"] {
            let entry = ade_catalog(name).unwrap();
            let json = serde_json::to_string(&entry.resolution).unwrap();
            let back: ResolutionData = serde_json::from_str(&json).unwrap();
            assert_eq!(json, serde_json::to_string(&back).unwrap(), "{name}");
        }
    }

    #[test]
    fn schema_violations_are_rejected() {
        let mk = |strata: Vec<(Vec<String>, MotivicExpr)>| {
            ResolutionData::new(
                2,
                vec![Component {
                    id: "E1".into(),
                    nu: 1,
                }],
                strata,
            )
        };
        // non-polynomial stratum classes
        assert!(mk(vec![(vec!["E1".into()], expr("L^(-1)"))]).is_err());
        let one_r = crate::Rational::from(num::BigInt::from(1));
        let zero_r = crate::Rational::from(num::BigInt::from(0));
        assert!(mk(vec![(
            vec!["E1".into()],
            MotivicExpr::term(one_r, zero_r, &[2]),
        )])
        .is_err());
        // undeclared id, duplicate subset, repeated member
        assert!(mk(vec![(vec!["E9".into()], expr("1"))]).is_err());
        assert!(mk(vec![
            (vec!["E1".into()], expr("1")),
            (vec!["E1".into()], expr("L")),
        ])
        .is_err());
        assert!(mk(vec![(vec!["E1".into(), "E1".into()], expr("1"))]).is_err());
        // nu = 0
        assert!(ResolutionData::new(
            2,
            vec![Component {
                id: "E1".into(),
                nu: 0,
            }],
            vec![],
        )
        .is_err());
    }

    #[test]
    fn mckay_identity_across_the_catalog_sample() {
        for name in ["A:3", "A:7", "D:2", "D:4", "E6"] {
            let entry = ade_catalog(name).unwrap();
            let g = Group::generate(&entry.group, DEFAULT_GROUP_CAP).unwrap();
            let outcome = check_mckay_identity(&entry.resolution, &g).unwrap();
            assert!(outcome.holds, "{name}");
        }
    }
}
