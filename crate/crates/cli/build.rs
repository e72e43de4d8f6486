use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/index");
    let pkg = format!("v{}", env!("CARGO_PKG_VERSION"));
    let describe = Command::new("git")
        .args(["describe", "--tags", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    // Without a tag, describe prints a bare hash; prefix the crate version.
    let version = match describe {
        Some(d) if d.starts_with('v') => d,
        Some(d) => format!("{pkg}-g{d}"),
        None => pkg,
    };
    println!("cargo:rustc-env=SEMIGRAPH_VERSION={version}");
}
