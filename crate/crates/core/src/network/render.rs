use std::fmt::Write;

use super::{TdmSchedule, Topology};

/// `A`, `B`, … for up to 26 users, `U1`, `U2`, … beyond. With `subnets`,
/// user `i` of a schedule padded to `p` users is labelled by its position
/// `i mod p/2` and its half, e.g. `C2`.
pub fn user_label(i: usize, n: usize, subnets: Option<usize>) -> String {
    match subnets {
        Some(p) if p >= 4 => {
            let h = p / 2;
            format!("{}{}", user_label(i % h, h, None), i / h + 1)
        }
        _ if n <= 26 => char::from(b'A' + i as u8).to_string(),
        _ => format!("U{}", i + 1),
    }
}

/// Bins as rows, relay modules as columns.
pub fn schedule_table(s: &TdmSchedule) -> String {
    let label = |u| user_label(u, s.n_users, Some(s.padded_users));
    let mut rows = vec![std::iter::once("bin".to_string())
        .chain((0..s.bsm_count).map(|k| format!("BSM{}", k + 1)))
        .collect::<Vec<_>>()];
    for bin in 0..s.bins {
        let mut row = vec![format!("t{}", bin + 1)];
        for bsm in 0..s.bsm_count {
            row.push(match s.slot(bin, bsm) {
                Some(slot) => format!("{}-{}", label(slot.users[0]), label(slot.users[1])),
                None => "-".into(),
            });
        }
        rows.push(row);
    }
    align(&rows)
}

pub fn topology_table(t: &Topology) -> String {
    let label = |u| user_label(u, t.n_users, None);
    let mut rows = vec![vec!["pair".to_string(), "channel".into(), "bsm".into()]];
    for e in &t.edges {
        rows.push(vec![
            format!("{}-{}", label(e.users[0]), label(e.users[1])),
            format!("CH{}", e.channel + 1),
            format!("BSM{}", e.bsm + 1),
        ]);
    }
    align(&rows)
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let width: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(|s| s.chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let line: Vec<String> = r.iter().enumerate().map(|(c, s)| format!("{:<w$}", s, w = width[c])).collect();
        writeln!(out, "{}", line.join("  ").trim_end()).expect("string write");
    }
    out
}
