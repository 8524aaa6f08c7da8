#![no_main]

use gsdma_core::channel::ErrorTable;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = ErrorTable::parse_csv(text) {
        let again = ErrorTable::parse_csv(&table.to_csv()).expect("rendered table parses");
        assert_eq!(again, table);
        let v = table.lookup(17.5, 2.0);
        let eps = 1e-12 * table.max_value().abs().max(1.0);
        assert!(v >= table.min_value() - eps && v <= table.max_value() + eps);
    }
});
