//! Communication for the dataset shapes with both selection kinds.

use pdte_core::bench::{bench, BenchOptions, Shape, BENCH_HEADER, DATASETS};
use pdte_core::oselect::OsKind;

fn main() {
    println!("{BENCH_HEADER}");
    for (name, ..) in DATASETS.iter().take(4) {
        let shape = Shape::preset(name).unwrap();
        for os in [OsKind::Rss, OsKind::Dpf] {
            let opts = BenchOptions { os, ..Default::default() };
            match bench(&shape, &opts) {
                Ok(row) => println!("{}", row.csv()),
                Err(e) => eprintln!("{name} {os}: {e}"),
            }
        }
    }
}
