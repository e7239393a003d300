#![no_main]

use libfuzzer_sys::fuzz_target;

// Parsing arbitrary bytes must never panic, and anything that parses must
// survive a canonical serialize/parse cycle unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(tc) = thermofal::format::parse_test_case(data) {
        let json = thermofal::format::test_case_to_json(&tc);
        let reparsed =
            thermofal::format::parse_test_case(json.as_bytes()).expect("canonical form parses");
        assert_eq!(reparsed, tc);
        assert_eq!(thermofal::format::test_case_to_json(&reparsed), json);
    }
});
