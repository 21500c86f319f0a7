#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    coded_inference_fuzz::schedule_json(data);
});
