use std::process::Command;

fn main() {
    // Embed a git-describable version string in run manifests; fall back to
    // the package version when git metadata is unavailable.
    let git = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty());
    let version = match git {
        Some(describe) => format!("{}+g{}", env!("CARGO_PKG_VERSION"), describe),
        None => env!("CARGO_PKG_VERSION").to_string(),
    };
    println!("cargo:rustc-env=NTKLAB_BUILD_VERSION={version}");
    println!("cargo:rerun-if-changed=build.rs");
}
