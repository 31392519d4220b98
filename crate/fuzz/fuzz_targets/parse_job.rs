#![no_main]

use libfuzzer_sys::fuzz_target;
use toric_deform::job::JobDocument;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(job) = JobDocument::from_json(text) else { return };
    let again = JobDocument::from_json(&job.to_json()).unwrap();
    assert_eq!(again, job);
    let _ = job.ring();
});
