use std::process::ExitCode;

use lindbloch::cli::{
    cmd_simulate, cmd_spectrum, cmd_sweep, cmd_validate, CliError, Plane, TOL_ENV_VAR,
};

const USAGE: &str = "usage:
  lindbloch simulate --config <path> [--csv <path>] [--svg <path> --plane xy|xz|yz] [--tol <f>]
  lindbloch spectrum --config <path>
  lindbloch sweep --omega0 <f> --beta-min <f> --beta-max <f> --count <n> [--csv <path>]
  lindbloch validate --config <path>";

fn usage_error(message: &str) -> CliError {
    CliError::Config(format!("{message}\n{USAGE}"))
}

struct Flags {
    config: Option<String>,
    csv: Option<String>,
    svg: Option<String>,
    plane: Option<Plane>,
    tol: Option<f64>,
    omega0: Option<f64>,
    beta_min: Option<f64>,
    beta_max: Option<f64>,
    count: Option<usize>,
}

fn parse_flags(args: &[String]) -> Result<Flags, CliError> {
    let mut flags = Flags {
        config: None,
        csv: None,
        svg: None,
        plane: None,
        tol: None,
        omega0: None,
        beta_min: None,
        beta_max: None,
        count: None,
    };
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let mut value = || {
            it.next()
                .cloned()
                .ok_or_else(|| usage_error(&format!("{flag} needs a value")))
        };
        match flag.as_str() {
            "--config" => flags.config = Some(value()?),
            "--csv" => flags.csv = Some(value()?),
            "--svg" => flags.svg = Some(value()?),
            "--plane" => {
                let v = value()?;
                flags.plane = Some(Plane::parse(&v).ok_or_else(|| {
                    usage_error(&format!("--plane must be xy, xz or yz, got {v}"))
                })?);
            }
            "--tol" => flags.tol = Some(parse_number(flag, &value()?)?),
            "--omega0" => flags.omega0 = Some(parse_number(flag, &value()?)?),
            "--beta-min" => flags.beta_min = Some(parse_number(flag, &value()?)?),
            "--beta-max" => flags.beta_max = Some(parse_number(flag, &value()?)?),
            "--count" => {
                let v = value()?;
                flags.count =
                    Some(v.parse().map_err(|_| {
                        usage_error(&format!("--count must be an integer, got {v}"))
                    })?);
            }
            other => return Err(usage_error(&format!("unknown flag {other}"))),
        }
    }
    Ok(flags)
}

fn parse_number(flag: &str, text: &str) -> Result<f64, CliError> {
    text.parse()
        .map_err(|_| usage_error(&format!("{flag} must be a number, got {text}")))
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| usage_error(&format!("{flag} is required")))
}

fn run() -> Result<(), CliError> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let Some(command) = args.first() else {
        return Err(usage_error("missing subcommand"));
    };
    let flags = parse_flags(&args[1..])?;
    let env_tol = std::env::var(TOL_ENV_VAR).ok();
    let mut stdout = std::io::stdout();
    match command.as_str() {
        "simulate" => cmd_simulate(
            &require(flags.config, "--config")?,
            flags.csv.as_deref(),
            flags.svg.as_deref(),
            flags.plane,
            flags.tol,
            env_tol.as_deref(),
            &mut stdout,
        ),
        "spectrum" => cmd_spectrum(&require(flags.config, "--config")?, &mut stdout),
        "sweep" => cmd_sweep(
            require(flags.omega0, "--omega0")?,
            require(flags.beta_min, "--beta-min")?,
            require(flags.beta_max, "--beta-max")?,
            require(flags.count, "--count")?,
            flags.csv.as_deref(),
            &mut stdout,
        ),
        "validate" => cmd_validate(&require(flags.config, "--config")?),
        other => Err(usage_error(&format!("unknown subcommand {other}"))),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
