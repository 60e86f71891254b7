mod common;

use std::collections::BTreeSet;

#[test]
fn every_template_row_matches_its_golden() {
    let goldens = common::template_goldens();
    for g in &goldens {
        assert_eq!(g.actual(), g.expected, "{} row {}", g.table, g.row);
    }
    for g in &goldens {
        let covered: BTreeSet<u8> = goldens.iter().filter(|o| o.table == g.table).map(|o| o.row).collect();
        let rows: BTreeSet<u8> = g.templates.rows().iter().copied().collect();
        assert_eq!(covered, rows, "{}", g.table);
    }
}
