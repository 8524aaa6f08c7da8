#![no_main]

use gsdma_cli::results::{read_results, read_table, to_csv_string};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = read_table(data);
    if let Ok(rows) = read_results(data) {
        let text = to_csv_string(&rows).expect("parsed rows are writable");
        assert_eq!(read_results(text.as_bytes()).expect("rewritten rows parse"), rows);
    }
});
