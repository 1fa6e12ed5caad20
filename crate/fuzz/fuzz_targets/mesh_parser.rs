#![no_main]

use libfuzzer_sys::fuzz_target;
use polyhho::mesh::{parse_mesh, write_mesh};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(mesh) = parse_mesh(text) else { return };
    // Anything accepted must survive a write/read round trip.
    let mut out = Vec::new();
    write_mesh(&mesh, &mut out).unwrap();
    let again = parse_mesh(std::str::from_utf8(&out).unwrap()).expect("rewritten mesh rejected");
    assert_eq!(again.num_elements(), mesh.num_elements());
    assert_eq!(again.num_faces(), mesh.num_faces());
});
