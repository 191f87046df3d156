//! Replays the stored oracle run and checks the freshly computed table
//! against it field by field.

use motivic_mckay::jet_oracle::{jet_count_table, JetBudget, JetFixture};

#[test]
fn stored_a1_q2_run_reproduces() {
    let raw = include_str!("fixtures/a1_q2_n2.json");
    let fixture: JetFixture = serde_json::from_str(raw).expect("fixture parses");
    let table = jet_count_table(&fixture.problem, Some(2), &JetBudget::default())
        .expect("table computes within budget");
    assert_eq!(table, fixture.table);
}
