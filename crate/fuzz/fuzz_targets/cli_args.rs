#![no_main]

use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated. `--out` is dropped so runs never write files.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let args: Vec<&str> = text
        .split('\0')
        .filter(|a| !a.starts_with("--out"))
        .collect();
    let argv = std::iter::once("rekit").chain(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = rekit_cli::run(argv, &mut out, &mut err);
    assert!((0..=2).contains(&code));
    if code != 0 {
        assert_eq!(String::from_utf8_lossy(&err).trim_end().lines().count(), 1);
    }
});
