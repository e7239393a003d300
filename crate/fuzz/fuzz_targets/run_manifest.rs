#![no_main]

use libfuzzer_sys::fuzz_target;

// parse_manifest is the pure half of manifest loading (no filesystem
// checks), so it can be driven with arbitrary bytes.
fuzz_target!(|data: &[u8]| {
    if let Ok(manifest) = thermofal::format::parse_manifest(data) {
        let json = thermofal::format::manifest_to_json(&manifest);
        let reparsed =
            thermofal::format::parse_manifest(json.as_bytes()).expect("canonical form parses");
        assert_eq!(reparsed, manifest);
    }
});
