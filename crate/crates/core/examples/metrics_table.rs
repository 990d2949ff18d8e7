//! The five clustering scores on a few hand-made labelings.

use spatial_onmf::metrics::{contingency, Scores};

fn main() -> spatial_onmf::Result<()> {
    let truth = [0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2, 2];
    let cases: [(&str, [usize; 12]); 5] = [
        ("identical", truth),
        ("relabeled", [2, 2, 2, 2, 0, 0, 0, 0, 1, 1, 1, 1]),
        ("one swap", [0, 0, 0, 1, 0, 1, 1, 1, 2, 2, 2, 2]),
        ("merged", [0, 0, 0, 0, 0, 0, 0, 0, 2, 2, 2, 2]),
        ("single", [1; 12]),
    ];
    println!("{:<10} {:>8} {:>8} {:>8} {:>8} {:>8}", "labels", "E", "VI", "VD", "VDn", "VIn");
    for (name, pred) in cases {
        let t = contingency(&pred, &truth, 3)?;
        let s = Scores::of(&t);
        println!("{name:<10} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8.4}", s.e, s.vi, s.vd, s.vd_n, s.vi_n);
    }
    Ok(())
}
