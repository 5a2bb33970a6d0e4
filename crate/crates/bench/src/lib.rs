//! Benchmark inputs shared by the criterion targets.

/// A JSONC document of roughly `n` properties with comments and nesting.
pub fn sample_document(n: usize) -> String {
    let mut out = String::from("{\n  // generated\n");
    for i in 0..n {
        out.push_str(&format!(
            "  \"key{i}\": {{\"values\": [{i}, {}, {}], \"flag\": {}, \"name\": \"item {i}\"}},\n",
            i * 2,
            i * 3,
            i % 2 == 0
        ));
    }
    out.push_str("  \"last\": null\n}\n");
    out
}
