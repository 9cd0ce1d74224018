use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;

use logratio_core::data::{
    load_csv, validate_composition, write_csv, Column, ColumnRole, Dataset, Schema, ZeroPolicy,
};
use logratio_core::interpret::{render_interpretation, SchemeTransform};
use logratio_core::lsq::INTERCEPT;
use logratio_core::models::{
    fit_comp_covariates, fit_comp_response, fit_naive_raw, fit_within_composition, Family,
    ModelFit, ModelSpec, NaiveFit, PivotTable, Response,
};
use logratio_core::simplex::{to_coordinates, variation_matrix, CoordinateScheme, PivotSpec};
use logratio_core::synth::{generate, GeneratorSpec, ResponseKind, ResponseSpec};
use serde::Serialize;

use crate::args::{
    FitWithin, FitX, FitY, Format, Input, ModelOpts, NaiveLm, ResponseArg, Simulate, Transform,
    Varmatrix,
};
use crate::render;

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Numerical(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) => f.write_str(m),
        }
    }
}

impl From<logratio_core::Error> for Failure {
    fn from(e: logratio_core::Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Validation(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn zero_policy(s: &str) -> Result<ZeroPolicy, Failure> {
    if s == "reject" {
        return Ok(ZeroPolicy::Reject);
    }
    s.strip_prefix("replace:")
        .and_then(|eps| eps.parse().ok())
        .map(ZeroPolicy::MultiplicativeReplace)
        .ok_or_else(|| {
            Failure::Validation(format!(
                "zero policy must be \"reject\" or \"replace:EPS\", got \"{s}\""
            ))
        })
}

fn load(input: &Input, extra: &[(&str, ColumnRole)]) -> Result<Dataset, Failure> {
    let mut schema = Schema::default();
    for p in &input.parts {
        schema.push(p.clone(), ColumnRole::CompositionalPart);
    }
    for (name, role) in extra {
        schema.push(*name, *role);
    }
    let data = load_csv(&input.data, &schema)?;
    Ok(validate_composition(&data, zero_policy(&input.zero_policy)?)?)
}

fn covariate_roles(model: &ModelOpts) -> Vec<(&str, ColumnRole)> {
    model
        .covariates
        .iter()
        .map(|c| (c.as_str(), ColumnRole::NumericCovariate))
        .collect()
}

fn check_hidden(model: &ModelOpts, parts: &[String]) -> Result<(), Failure> {
    match model.hide_parts.iter().find(|h| !parts.contains(h)) {
        Some(h) => Err(Failure::Validation(format!(
            "--hide-parts names \"{h}\", which is not one of --parts"
        ))),
        None => Ok(()),
    }
}

fn spec(input: &Input, model: &ModelOpts, family: Family, response: Response) -> ModelSpec {
    ModelSpec {
        family,
        parts: input.parts.clone(),
        covariates: model.covariates.clone(),
        response,
        scheme: model.scheme.into(),
        alpha: model.alpha,
    }
}

#[derive(Serialize)]
struct TableReport<'a> {
    table: &'a PivotTable,
    hidden_parts: &'a [String],
    interpretation: Vec<String>,
}

fn interpretation(table: &PivotTable) -> Result<Vec<String>, Failure> {
    Ok(render_interpretation(table, &SchemeTransform::for_table(table)?))
}

fn json<T: Serialize>(value: &T) -> Outcome {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn table_report(table: &PivotTable, input: &Input, model: &ModelOpts, text: String) -> Outcome {
    match input.format {
        Format::Json => json(&TableReport {
            table,
            hidden_parts: &model.hide_parts,
            interpretation: interpretation(table)?,
        }),
        Format::Table => {
            let mut shown = table.clone();
            shown.rows.retain(|r| !model.hide_parts.contains(&r.part));
            // the transform depends on all parts, not just the shown ones
            let lines = render_interpretation(&shown, &SchemeTransform::for_table(table)?);
            let mut out = text;
            if model.interpret && !lines.is_empty() {
                out.push('\n');
                for l in lines {
                    out.push_str(&l);
                    out.push('\n');
                }
            }
            Ok(out)
        }
    }
}

/// Intercept, one row per visible part, then covariates.
fn covariate_model_text(table: &PivotTable, hidden: &[String]) -> String {
    let mut rows = Vec::new();
    let mut shared = table.shared.iter();
    if let Some(c) = shared.next() {
        rows.push((INTERCEPT.to_string(), c));
    }
    for row in table.rows.iter().filter(|r| !hidden.contains(&r.part)) {
        rows.push((row.part.clone(), &row.terms[0]));
    }
    rows.extend(shared.map(|c| (c.name.clone(), c)));
    let mut out = render::coefficient_table(&rows, table.statistic_label());
    if let Some(stats) = &table.stats {
        out.push('\n');
        out.push_str(&render::stats_footer(stats));
    }
    out
}

pub fn fit_x(args: &FitX) -> Outcome {
    let family: Family = args.family.into();
    check_hidden(&args.model, &args.input.parts)?;
    let role = match family {
        Family::Gaussian => ColumnRole::NumericResponse,
        Family::Binomial => ColumnRole::BinaryResponse,
    };
    let mut extra = covariate_roles(&args.model);
    extra.push((args.response.as_str(), role));
    let data = load(&args.input, &extra)?;
    let spec = spec(&args.input, &args.model, family, Response::Variable(args.response.clone()));
    let table = fit_comp_covariates(&data, &spec)?;
    let text = covariate_model_text(&table, &args.model.hide_parts);
    table_report(&table, &args.input, &args.model, text)
}

pub fn fit_y(args: &FitY) -> Outcome {
    check_hidden(&args.model, &args.input.parts)?;
    let data = load(&args.input, &covariate_roles(&args.model))?;
    let spec = spec(&args.input, &args.model, Family::Gaussian, Response::Composition);
    let table = fit_comp_response(&data, &spec)?;
    let visible: Vec<_> = table
        .rows
        .iter()
        .filter(|r| !args.model.hide_parts.contains(&r.part))
        .collect();
    let terms: Vec<String> = table.rows[0].terms.iter().map(|t| t.name.clone()).collect();
    let parts: Vec<String> = visible.iter().map(|r| r.part.clone()).collect();
    let cells: Vec<Vec<_>> = visible.iter().map(|r| r.terms.iter().collect()).collect();
    let text = render::estimate_matrix(&parts, &terms, &cells);
    table_report(&table, &args.input, &args.model, text)
}

pub fn fit_within(args: &FitWithin) -> Outcome {
    check_hidden(&args.model, &args.input.parts)?;
    let data = load(&args.input, &covariate_roles(&args.model))?;
    let spec = spec(
        &args.input,
        &args.model,
        Family::Gaussian,
        Response::Part(args.target.clone()),
    );
    let table = fit_within_composition(&data, &args.target, &spec)?;
    let text = covariate_model_text(&table, &args.model.hide_parts);
    table_report(&table, &args.input, &args.model, text)
}

#[derive(Serialize)]
struct CoordinateReport {
    scheme: CoordinateScheme,
    pivot: String,
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn transform(args: &Transform) -> Outcome {
    let data = load(&args.input, &[])?;
    let parts = &args.input.parts;
    let pivot = match &args.pivot {
        None => 0,
        Some(p) => parts.iter().position(|x| x == p).ok_or_else(|| {
            Failure::Validation(format!("pivot \"{p}\" is not one of --parts"))
        })?,
    };
    let comps = data.compositions(parts)?;
    let block = to_coordinates(&comps, &PivotSpec::new(pivot, parts.len())?, args.scheme.into())?
        .with_part_names(parts)?;
    let names = block.coordinate_names();
    match args.input.format {
        Format::Json => json(&CoordinateReport {
            scheme: block.scheme,
            pivot: parts[pivot].clone(),
            rows: (0..block.nrows())
                .map(|r| block.values.row(r).iter().copied().collect())
                .collect(),
            names,
        }),
        Format::Table => {
            let columns = names
                .into_iter()
                .enumerate()
                .map(|(j, n)| Column::new(n, ColumnRole::NumericCovariate, block.column(j)))
                .collect();
            let mut buf = Vec::new();
            write_csv(&Dataset::new(columns)?, &mut buf)?;
            String::from_utf8(buf).map_err(|e| Failure::Validation(e.to_string()))
        }
    }
}

pub fn varmatrix(args: &Varmatrix) -> Outcome {
    let data = load(&args.input, &[])?;
    let mut vm = variation_matrix(&data.compositions(&args.input.parts)?)?;
    vm.part_names = args.input.parts.clone();
    match args.input.format {
        Format::Json => json(&vm),
        Format::Table => Ok(render::variation_table(&vm)),
    }
}

pub fn naive_lm(args: &NaiveLm) -> Outcome {
    if args.input.parts.contains(&args.response) {
        return Err(Failure::Validation(format!(
            "response \"{}\" must not be listed in --parts",
            args.response
        )));
    }
    let mut extra: Vec<(&str, ColumnRole)> = vec![(&args.response, ColumnRole::CompositionalPart)];
    extra.extend(args.covariates.iter().map(|c| (c.as_str(), ColumnRole::NumericCovariate)));
    let data = load(&args.input, &extra)?;
    let naive: NaiveFit = fit_naive_raw(
        &data,
        &args.response,
        &args.input.parts,
        &args.covariates,
        args.alpha,
    )?;
    if let Some(w) = &naive.warning {
        log::warn!("{w}");
    }
    match args.input.format {
        Format::Json => json(&naive),
        Format::Table => {
            let fit = ModelFit::Ols(naive.fit.clone());
            let coefs: Vec<_> = (0..fit.coefficients().len())
                .map(|j| fit.coefficient(j, args.alpha))
                .collect();
            let rows: Vec<(String, _)> = coefs.iter().map(|c| (c.name.clone(), c)).collect();
            let mut out = String::from("Coefficients:\n");
            out.push_str(&render::coefficient_table(&rows, "t"));
            out.push('\n');
            out.push_str(&render::stats_footer(&fit.stats()));
            if let Some(w) = &naive.warning {
                out.push_str(&format!("\nWarning: {w}\n"));
            }
            Ok(out)
        }
    }
}

pub fn simulate(args: &Simulate) -> Outcome {
    let spec: GeneratorSpec = match &args.spec {
        Some(path) => {
            let file = File::open(path).map_err(|e| {
                Failure::Validation(format!("cannot open {}: {e}", path.display()))
            })?;
            serde_json::from_reader(file)?
        }
        None => {
            let mut spec = GeneratorSpec::new(args.n, args.d, args.seed);
            spec.noise_sd = args.noise_sd;
            spec.total = args.total;
            let kind = match args.response {
                ResponseArg::None => None,
                ResponseArg::Gaussian => Some(ResponseKind::Gaussian),
                ResponseArg::Binomial => Some(ResponseKind::Binomial),
            };
            spec.response = kind.map(|kind| ResponseSpec {
                name: "y".into(),
                kind,
                intercept: 0.0,
                coord_effects: vec![0.5; args.d.saturating_sub(1)],
                covariate_effects: BTreeMap::new(),
                noise_sd: 1.0,
            });
            spec
        }
    };
    let data = generate(&spec)?;
    let file = File::create(&args.out)
        .map_err(|e| Failure::Validation(format!("cannot create {}: {e}", args.out.display())))?;
    write_csv(&data, file)?;
    log::info!("wrote {} rows to {}", data.n_rows(), args.out.display());
    Ok(String::new())
}
