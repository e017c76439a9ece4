#![allow(dead_code)]

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

pub const KP2: &str = "cover KP n=2 a=0\ncuspidal rho1 r0=1 l=1\nm M1 = [0,2]_rho1\n";

pub const MIXED: &str = "\
# two lines on a 4-fold KP cover
cover KP n=4 a=1
cuspidal p r0=1 l=1
cuspidal q r0=2 l=2
m A = [0,3]_p + [1,2]_p
m B = [0,1]_q + [2,2]_q
m C = [0,4]_p
";

pub const SAVIN: &str =
    "cover S n=4\ncuspidal p r0=2 l=2\nm X = [0,1]_p\nm Y = [0,2]_p + [0,0]_p\n";

pub fn session_file(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

pub fn covseg(args: &[&str]) -> Output {
    covseg_env(args, &[])
}

pub fn covseg_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_covseg"));
    cmd.args(args).env_remove("COVSEG_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn covseg_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_covseg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}
