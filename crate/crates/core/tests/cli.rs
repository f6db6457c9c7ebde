use std::io::{Cursor, Write};
use std::path::Path;
use std::process::{Command, Stdio};

use kedit_stream::cli::{run, EXIT_OK, EXIT_USAGE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

struct Output {
    code: i32,
    stdout: String,
    stderr: String,
}

fn kedit(args: &[&str], stdin: &[u8]) -> Output {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("kedit").chain(args.iter().copied());
    let code = run(argv, Box::new(Cursor::new(stdin.to_vec())), &mut out, &mut err);
    Output {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, data: &[u8]) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, data).unwrap();
    path.to_str().unwrap().to_owned()
}

fn random_bytes(rng: &mut ChaCha8Rng, len: usize, alphabet: &[u8]) -> Vec<u8> {
    (0..len).map(|_| alphabet[rng.gen_range(0..alphabet.len())]).collect()
}

#[test]
fn exact_self_match_ends_at_zero() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = random_bytes(&mut rng, 3000, b"acgt");
    let f = write(&dir, "x", &x);
    let o = kedit(&["match", "-k", "0", "-p", &f, "-t", &f], b"");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), x.len());
    assert_eq!(*lines.last().unwrap(), "3000\t0");
    assert!(lines[..lines.len() - 1].iter().all(|l| l.ends_with("\t>0")));
}

#[test]
fn negative_k_is_a_usage_error() {
    let o = kedit(&["match", "-k", "-1", "-p", "-"], b"");
    assert_eq!(o.code, EXIT_USAGE);
    assert!(!o.stderr.is_empty());
}

#[test]
fn both_inputs_on_stdin_need_a_pattern_length() {
    let o = kedit(&["match", "-k", "1", "-p", "-", "-t", "-"], b"abcabc");
    assert_eq!(o.code, EXIT_USAGE);
    let o = kedit(
        &["match", "-k", "1", "-p", "-", "-t", "-", "--pattern-len", "3"],
        b"abcabc",
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout, "1\t>1\n2\t1\n3\t0\n");
}

#[test]
fn missing_file_is_a_runtime_error() {
    let o = kedit(&["match", "-k", "1", "-p", "/nonexistent/kedit"], b"");
    assert_ne!(o.code, EXIT_OK);
    assert_ne!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("/nonexistent/kedit"));
}

#[test]
fn empty_and_tiny_texts() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p", b"ab");
    let empty = write(&dir, "e", b"");
    let o = kedit(&["match", "-k", "1", "-p", &p, "-t", &empty], b"");
    assert_eq!((o.code, o.stdout.as_str()), (EXIT_OK, ""));
    let three = write(&dir, "t", b"xab");
    let o = kedit(&["match", "-k", "1", "-p", &p, "-t", &three], b"");
    assert_eq!(o.stdout, "1\t>1\n2\t1\n3\t0\n");
}

#[test]
fn oracle_row_and_threshold() {
    let o = kedit(&["oracle", "-p", "-", "-t", "/dev/null"], b"");
    assert_eq!(o.code, EXIT_OK);
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p", b"ab");
    let t = write(&dir, "t", b"xxab");
    let o = kedit(&["oracle", "-p", &p, "-t", &t], b"");
    assert_eq!(o.stdout, "1\t2\n2\t2\n3\t1\n4\t0\n");
    let o = kedit(&["oracle", "-p", &p, "-t", &t, "-k", "1"], b"");
    assert_eq!(o.stdout, "1\t>1\n2\t>1\n3\t1\n4\t0\n");
}

#[test]
fn json_records() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p", b"ab");
    let t = write(&dir, "t", b"xab");
    let o = kedit(&["match", "-k", "1", "-p", &p, "-t", &t, "--format", "json"], b"");
    let recs: Vec<serde_json::Value> = o.stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 3);
    assert_eq!(recs[0]["finite"], false);
    assert!(recs[0]["dist"].is_null());
    assert_eq!(recs[2]["pos"], 3);
    assert_eq!(recs[2]["dist"], 0);
}

#[test]
fn utf8_symbols_are_code_points() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "p", "é".as_bytes());
    let t = write(&dir, "t", "aé".as_bytes());
    let o = kedit(&["oracle", "-p", &p, "-t", &t, "--utf8"], b"");
    assert_eq!(o.stdout, "1\t1\n2\t0\n");
    let o = kedit(&["oracle", "-p", &p, "-t", &t], b"");
    assert_eq!(o.stdout.lines().count(), 3);
    let bad = write(&dir, "bad", &[0x61, 0xff]);
    let o = kedit(&["oracle", "-p", &p, "-t", &bad, "--utf8"], b"");
    assert_ne!(o.code, EXIT_OK);
}

#[test]
fn compare_is_sound_on_planted_cases() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let k = rng.gen_range(0..4u32);
        let (plen, pre, post) = (rng.gen_range(1..400), rng.gen_range(0..300), rng.gen_range(0..50));
        let pat = random_bytes(&mut rng, plen, b"ab");
        let mut text = random_bytes(&mut rng, pre, b"ab");
        let mut planted = pat.clone();
        for _ in 0..rng.gen_range(0..=k) {
            let i = rng.gen_range(0..planted.len());
            planted[i] ^= 3;
        }
        text.extend(planted);
        text.extend(random_bytes(&mut rng, post, b"ab"));
        let p = write(&dir, "p", &pat);
        let t = write(&dir, "t", &text);
        let seed = trial.to_string();
        let o = kedit(
            &[
                "compare",
                "-k",
                &k.to_string(),
                "-p",
                &p,
                "-t",
                &t,
                "--beta",
                "8",
                "--seed",
                &seed,
            ],
            b"",
        );
        assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
        assert!(
            o.stdout.trim_end().ends_with("sound=1.000000"),
            "trial {trial}: {}",
            o.stdout
        );
    }
}

#[test]
fn decompose_table_covers_input() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_bytes(&mut rng, 5000, b"abc");
    let f = write(&dir, "x", &x);
    let o = kedit(&["decompose", &f], b"");
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let mut lines = o.stdout.lines();
    assert!(lines.next().unwrap().starts_with("# len=5000 blocks="));
    assert_eq!(lines.next().unwrap(), "block\tstart\tlen\trules");
    let mut next_start = 1;
    for l in lines.filter(|l| !l.starts_with('#')) {
        let cols: Vec<u64> = l.split('\t').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[1], next_start);
        next_start += cols[2];
    }
    assert_eq!(next_start, 5001);
}

#[test]
fn bench_prints_csv() {
    let o = kedit(
        &[
            "bench",
            "-k",
            "2",
            "--pattern-len",
            "300",
            "--text-len",
            "2000",
            "--copies",
            "2",
        ],
        b"",
    );
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    assert_eq!(&row[..4], &["2", "300", "2000", "2"]);
}

fn binary(args: &[&str], stdin_file: Option<&Path>, env: &[(&str, &str)]) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kedit"));
    cmd.args(args).stdout(Stdio::piped()).stderr(Stdio::null());
    cmd.env_remove("KEDIT_SEED").env_remove("KEDIT_COPIES");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = match stdin_file {
        Some(f) => {
            let data = std::fs::read(f).unwrap();
            let mut child = cmd.stdin(Stdio::piped()).spawn().unwrap();
            let mut pipe = child.stdin.take().unwrap();
            let writer = std::thread::spawn(move || pipe.write_all(&data));
            let out = child.wait_with_output().unwrap();
            writer.join().unwrap().unwrap();
            out
        }
        None => cmd.stdin(Stdio::null()).output().unwrap(),
    };
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn stdin_pipe_matches_file_input() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pat = random_bytes(&mut rng, 2000, b"acgt");
    let mut text = random_bytes(&mut rng, 1_000_000, b"acgt");
    text[500_000..502_000].copy_from_slice(&pat);
    let p = write(&dir, "p", &pat);
    let t = write(&dir, "t", &text);
    let common = ["match", "-k", "2", "-p", &p, "--n-bound", "1002000", "--copies", "2"];
    let (c1, from_file) = binary(&[&common[..], &["-t", &t]].concat(), None, &[]);
    let (c2, from_pipe) = binary(&common, Some(Path::new(&t)), &[]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(from_file.iter().filter(|&&b| b == b'\n').count(), 1_000_000);
    assert!(from_file == from_pipe, "stdin and file outputs differ");
    let hit = String::from_utf8_lossy(&from_file)
        .lines()
        .nth(501_999)
        .unwrap()
        .to_owned();
    assert_eq!(hit, "502000\t0");
}

#[test]
fn seed_from_environment() {
    let dir = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pat = random_bytes(&mut rng, 600, b"ab");
    let text = random_bytes(&mut rng, 3000, b"ab");
    let p = write(&dir, "p", &pat);
    let t = write(&dir, "t", &text);
    let args = ["decompose", "--grammars", &t];
    let (_, env_seed) = binary(&args, None, &[("KEDIT_SEED", "99")]);
    let (_, flag_seed) = binary(&[&args[..], &["--seed", "99"]].concat(), None, &[]);
    let (_, default_seed) = binary(&args, None, &[]);
    assert_eq!(env_seed, flag_seed);
    assert_ne!(env_seed, default_seed);
    let (code, _) = binary(
        &["match", "-k", "1", "-p", &p, "-t", &t],
        None,
        &[("KEDIT_COPIES", "1")],
    );
    assert_eq!(code, 0);
}
