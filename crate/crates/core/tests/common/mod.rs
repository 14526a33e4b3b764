#![allow(dead_code)]

use std::sync::OnceLock;

use ffdlog::dlog::{check_snf_condition, decompose};
use ffdlog::oracle::{brute_logs, LogTable, DEFAULT_TABLE_BOUND};
use ffdlog::relations::{generate_all, CosetMode, RelationMatrix};
use ffdlog::{build_standalone, search_good, search_good_filtered, FieldSetup};

pub struct Fixture {
    pub setup: FieldSetup,
    pub matrix: RelationMatrix,
    pub table: LogTable,
}

/// First good `h` whose exhaustive relation lattice satisfies the SNF condition.
pub fn usable_setup(p: u32, e: u32, m: usize, c: u32, d: u32) -> FieldSetup {
    let t = build_standalone(p, e, m).unwrap();
    search_good_filtered(&t, c, d, |s| {
        generate_all(s, CosetMode::Exhaustive).is_ok_and(|r| check_snf_condition(&decompose(&r), s))
    })
    .unwrap()
}

fn fixture(setup: FieldSetup) -> Fixture {
    let matrix = generate_all(&setup, CosetMode::Exhaustive).unwrap();
    let table = brute_logs(&setup, DEFAULT_TABLE_BOUND).unwrap();
    Fixture { setup, matrix, table }
}

/// `q = 4, m = 3, C = 1, D = 2`: `L = 1`.
pub fn q4() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(search_good(&build_standalone(2, 2, 3).unwrap(), 1, 2).unwrap()))
}

/// `q = 5, m = 4, C = 1, D = 2`: `L = 313`.
pub fn q5() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(usable_setup(5, 1, 4, 1, 2)))
}

/// `q = 8, m = 4, C = 1, D = 2`: `L = 241`.
pub fn q8() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| fixture(usable_setup(2, 3, 4, 1, 2)))
}
