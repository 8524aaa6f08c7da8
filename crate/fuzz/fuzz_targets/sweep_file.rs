#![no_main]

use gsdma_cli::sweep::SweepSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(spec) = SweepSpec::parse(text, None, &[]) {
        let a = &spec.axes;
        let size = [a.protocol.len(), a.topology.len(), a.num_pairs.len(), a.snr_db.len(), a.arrival_rate.len()]
            .iter()
            .fold(1usize, |n, &l| n.saturating_mul(l.max(1)));
        // Expansion validates every point; keep it cheap.
        if size <= 4096 {
            let _ = spec.points("fuzz");
        }
    }
});
