#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(registry) = thermofal::format::parse_registry(data) {
        let json = thermofal::format::registry_to_json(&registry);
        let reparsed =
            thermofal::format::parse_registry(json.as_bytes()).expect("canonical form parses");
        assert_eq!(reparsed, registry);
    }
});
