//! Print the canonical feature registry as JSON.
fn main() {
    println!("{}", deobf_core::features::registry().to_json().unwrap());
}
