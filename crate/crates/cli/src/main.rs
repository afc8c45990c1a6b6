mod cache;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use coset_theta::arith::is_prime;
use coset_theta::classes::{enumerate_genus, spinor_classes, ClassList};
use coset_theta::decomposition::{decompose, verify_eichler, verify_genus_eigen};
use coset_theta::enumerate::{default_precision, theta_series, vectors_of_norm};
use coset_theta::json::{
    class_list_to_json, coset_from_json, coset_to_json, decomposition_to_json,
    identity_report_to_json, qseries_to_json, to_pretty,
};
use coset_theta::neighbors::{check_neighbor_set, check_prime, neighbors, pi_closed_form, pi_count};
use coset_theta::{Coset, Error};

use cache::Cache;

#[derive(Parser)]
#[command(name = "cosets", version, about = "Theta series and class enumeration for ternary lattice cosets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SearchArgs {
    /// Neighbour primes for the genus search
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Bypass the class-list cache
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// q-expansion of θ(aL+ν)
    Theta {
        file: PathBuf,
        #[arg(long)]
        precision: Option<u64>,
    },
    /// Proper classes of the genus
    Genus {
        file: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Proper classes of the spinor genus (candidate, cross-checked)
    Spinor {
        file: PathBuf,
        /// Search prime first; only the first entry is used for the search
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        validate: Option<Vec<u64>>,
        #[arg(long)]
        no_cache: bool,
    },
    /// θ = E + U + f with support checks on U
    Decompose {
        file: PathBuf,
        #[arg(long)]
        precision: Option<u64>,
        #[arg(long)]
        fit_unary: bool,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        spinor_prime: Option<u64>,
        #[arg(long, value_delimiter = ',')]
        validate: Option<Vec<u64>>,
    },
    /// Runs one of the verification suites; exits 1 on failure
    Verify {
        file: PathBuf,
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long)]
        prime: u64,
        #[arg(long)]
        precision: Option<u64>,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Eichler,
    GenusEigen,
    PiCounts,
    NeighborCount,
}

enum Failure {
    Lib(Error),
    Io(String),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<Value, Failure>;

fn read_coset(path: &PathBuf) -> Result<Coset, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Lib(Error::Schema(format!("{}: {e}", path.display()))))?;
    Ok(coset_from_json(&v)?)
}

fn admissible_primes(c: &Coset) -> impl Iterator<Item = u64> + '_ {
    let level = c.theta_level();
    (3u64..).filter(move |&p| is_prime(p) && (&level % p) != BigInt::from(0))
}

fn one_mod_a(c: &Coset, p: u64) -> bool {
    (BigInt::from(p) - 1u32) % c.modulus() == BigInt::from(0)
}

/// Smallest two admissible primes `≡ 1 mod a`.
fn default_spinor_primes(c: &Coset) -> (u64, u64) {
    let mut it = admissible_primes(c).filter(|&p| one_mod_a(c, p));
    (it.next().unwrap(), it.next().unwrap())
}

/// The spinor search prime followed by the four smallest admissible primes.
fn default_genus_primes(c: &Coset) -> Vec<u64> {
    let mut out = vec![default_spinor_primes(c).0];
    for p in admissible_primes(c).take(4) {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn cached(
    kind: &str,
    c: &Coset,
    primes: &[u64],
    validate: &[u64],
    no_cache: bool,
    compute: impl FnOnce() -> coset_theta::Result<ClassList>,
) -> coset_theta::Result<ClassList> {
    let cache = if no_cache { None } else { Cache::from_env() };
    let key = Cache::key(kind, c, primes, validate);
    if let Some(hit) = cache.as_ref().and_then(|k| k.load(&key, c)) {
        return Ok(hit);
    }
    let cl = compute()?;
    if let Some(k) = cache {
        if let Err(e) = k.store(&key, &cl) {
            eprintln!("warning: could not write cache entry: {e}");
        }
    }
    Ok(cl)
}

fn genus_list(c: &Coset, search: &SearchArgs) -> coset_theta::Result<ClassList> {
    let primes = search.primes.clone().unwrap_or_else(|| default_genus_primes(c));
    for &p in &primes {
        check_prime(c, p)?;
    }
    cached("genus", c, &primes, &[], search.no_cache, || enumerate_genus(c, &primes))
}

fn spinor_list(
    c: &Coset,
    prime: Option<u64>,
    validate: Option<Vec<u64>>,
    no_cache: bool,
) -> coset_theta::Result<ClassList> {
    let (p0, v0) = default_spinor_primes(c);
    let p = prime.unwrap_or(p0);
    let validate = validate.unwrap_or_else(|| if p == v0 { vec![p0] } else { vec![v0] });
    cached("spinor", c, &[p], &validate, no_cache, || spinor_classes(c, p, &validate))
}

fn run(cmd: Command) -> Outcome {
    match cmd {
        Command::Theta { file, precision } => {
            let c = read_coset(&file)?;
            let b = match precision {
                Some(b) => b,
                None => default_precision(&c)?,
            };
            Ok(qseries_to_json(&theta_series(&c, b)?))
        }
        Command::Genus { file, search } => {
            let c = read_coset(&file)?;
            Ok(class_list_to_json(&genus_list(&c, &search)?))
        }
        Command::Spinor {
            file,
            primes,
            validate,
            no_cache,
        } => {
            let c = read_coset(&file)?;
            let p = primes.and_then(|ps| ps.first().copied());
            Ok(class_list_to_json(&spinor_list(&c, p, validate, no_cache)?))
        }
        Command::Decompose {
            file,
            precision,
            fit_unary,
            search,
            spinor_prime,
            validate,
        } => {
            let c = read_coset(&file)?;
            let b = match precision {
                Some(b) => b,
                None => default_precision(&c)?,
            };
            let gen = genus_list(&c, &search)?;
            let spn = spinor_list(&c, spinor_prime, validate, search.no_cache)?;
            let report = decompose(&c, &gen, &spn, b, fit_unary)?;
            let v = decomposition_to_json(&report);
            if report.passed() {
                Ok(v)
            } else {
                Err(Failure::Verification(v))
            }
        }
        Command::Verify {
            file,
            check,
            prime,
            precision,
            search,
        } => {
            let c = read_coset(&file)?;
            verify(&c, check, prime, precision, &search)
        }
    }
}

fn verify(c: &Coset, check: Check, p: u64, precision: Option<u64>, search: &SearchArgs) -> Outcome {
    check_prime(c, p)?;
    let (v, ok) = match check {
        Check::Eichler => {
            let b = precision.map_or_else(|| default_precision(c), Ok)?;
            let r = verify_eichler(c, p, b)?;
            (identity_report_to_json(&r), r.passed())
        }
        Check::GenusEigen => {
            let b = precision.map_or_else(|| default_precision(c), Ok)?;
            let gen = genus_list(c, search)?;
            let r = verify_genus_eigen(&gen, p, b)?;
            (identity_report_to_json(&r), r.passed())
        }
        Check::NeighborCount => {
            let ns = neighbors(c, p)?;
            let structure = check_neighbor_set(&ns);
            let ok = ns.members.len() as u64 == p + 1 && structure.is_ok();
            (
                json!({
                    "check": "neighbor-count",
                    "prime": p,
                    "count": ns.members.len(),
                    "expected": p + 1,
                    "structure": structure.err(),
                    "passed": ok,
                    "members": ns.members.iter().map(|m| coset_to_json(m, true)).collect::<Vec<_>>(),
                }),
                ok,
            )
        }
        Check::PiCounts => {
            // all x in the coset with Q(x) = p²n for 1 ≤ n ≤ B
            let b = precision.unwrap_or(10);
            let ns = neighbors(c, p)?;
            let mut checked = 0u64;
            let mut mismatches = Vec::new();
            for n in 1..=b {
                for x in vectors_of_norm(c, &BigInt::from(p * p * n))? {
                    let got = pi_count(&x, c, p, &ns)?;
                    let want = pi_closed_form(&x, c, p)?;
                    checked += 1;
                    if got != want {
                        mismatches.push(json!({
                            "x": x.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
                            "n": n,
                            "count": got,
                            "closed_form": want,
                        }));
                    }
                }
            }
            let ok = mismatches.is_empty();
            (
                json!({
                    "check": "pi-counts",
                    "prime": p,
                    "max_n": b,
                    "vectors_checked": checked,
                    "mismatches": mismatches,
                    "passed": ok,
                }),
                ok,
            )
        }
    };
    if ok {
        Ok(v)
    } else {
        Err(Failure::Verification(v))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(v) => {
            print!("{}", to_pretty(&v));
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(v)) => {
            print!("{}", to_pretty(&v));
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match &e {
                Error::Schema(_) => 2,
                Error::ConductorMismatch { refactored, .. } => {
                    print!("{}", to_pretty(&json!({ "refactored": coset_to_json(refactored, false) })));
                    3
                }
                Error::InvalidPrime { .. } => 4,
                Error::ValidationDisagreement {
                    prime,
                    candidate,
                    other,
                } => {
                    print!(
                        "{}",
                        to_pretty(&json!({
                            "prime": prime,
                            "candidate": class_list_to_json(candidate),
                            "other": class_list_to_json(other),
                        }))
                    );
                    5
                }
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}
