#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(samples) = thermofal::format::parse_raw_trace(data) {
        let csv = thermofal::format::raw_trace_to_csv(&samples);
        let reparsed =
            thermofal::format::parse_raw_trace(csv.as_bytes()).expect("canonical form parses");
        assert_eq!(reparsed, samples);
    }
});
