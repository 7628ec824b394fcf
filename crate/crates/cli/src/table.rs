//! Plain-text and CSV renderings of a collection.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use toric_exc::collection::Collection;
use toric_exc::picard::DivisorClass;

/// One row per block, highest block first, named `E_k` as in the usual
/// tables. Divisor indices are 0-based.
pub fn block_table(col: &Collection) -> String {
    let top = col.blocks.len().saturating_sub(1);
    let mut s = format!("V_{}: {} line bundles in {} blocks\n", col.n, col.len(), col.blocks.len());
    for (b, blk) in col.blocks.iter().enumerate() {
        let points: BTreeSet<(i64, usize)> = blk.members.iter().map(|m| (m.c, m.ell())).collect();
        let points: Vec<String> = points.iter().map(|(c, l)| format!("({c},{l})")).collect();
        let members: Vec<String> = blk.members.iter().map(|m| bundle(&m.class(col.n))).collect();
        let _ = writeln!(s, "E_{}  l={}  {}  [{}]: {}", top - b, blk.ell, points.join(" "), blk.members.len(), members.join(", "));
    }
    s
}

pub fn members_csv(col: &Collection) -> String {
    let mut s = String::from("index,block,c,J,class\n");
    for (i, (b, m)) in col.flat().into_iter().enumerate() {
        let j: Vec<String> = m.j.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{i},{b},{},{},{}", m.c, j.join(" "), m.class(col.n));
    }
    s
}

fn bundle(d: &DivisorClass) -> String {
    if d.is_zero() {
        "O".into()
    } else {
        format!("O({d})")
    }
}
