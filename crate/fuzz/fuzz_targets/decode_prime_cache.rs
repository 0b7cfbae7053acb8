#![no_main]

use libfuzzer_sys::fuzz_target;
use pla_core::arith::PrimeTable;

fuzz_target!(|data: &[u8]| {
    if let Ok(table) = PrimeTable::decode(data) {
        let again = PrimeTable::decode(&table.encode()).expect("re-encoded image decodes");
        assert!(table.iter().eq(again.iter()));
    }
});
