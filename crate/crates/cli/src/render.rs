//! Fixed-width text in the layout of R's model summaries.

use logratio_core::lsq::FTest;
use logratio_core::models::{Coefficient, FitStats};
use logratio_core::simplex::VariationMatrix;

/// Smallest p-value printed as a number; R's machine-epsilon cutoff.
const P_FLOOR: f64 = 2.2e-16;

/// `d.dde-XX` with at least two exponent digits.
pub fn sci(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$e}");
    let Some((mantissa, exp)) = s.split_once('e') else {
        return s;
    };
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Coefficient-table p-value: five decimals, scientific below 1e-4.
pub fn format_p(p: f64) -> String {
    if p.is_nan() {
        "NA".into()
    } else if p < P_FLOOR {
        "< 2e-16".into()
    } else if p < 1e-4 {
        sci(p, 2)
    } else {
        format!("{p:.5}")
    }
}

/// `digits` significant digits.
pub fn signif(v: f64, digits: usize) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NA".into() } else { v.to_string() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let magnitude = v.abs().log10().floor() as i64;
    if !(-5..15).contains(&magnitude) {
        return sci(v, digits.saturating_sub(1));
    }
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn number(v: f64, decimals: usize) -> String {
    if v.is_nan() {
        "NA".into()
    } else if v.abs() >= 1e9 {
        sci(v, 3)
    } else {
        format!("{v:.decimals$}")
    }
}

/// Right-aligned columns after a left-aligned label column.
fn aligned(header: &[String], rows: &[Vec<String>]) -> String {
    let ncol = header.len();
    let widths: Vec<usize> = (0..ncol)
        .map(|j| {
            rows.iter()
                .map(|r| r[j].chars().count())
                .chain(std::iter::once(header[j].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        let mut line = format!("{:<w$}", row[0], w = widths[0]);
        for j in 1..ncol {
            line.push_str(&format!(" {:>w$}", row[j], w = widths[j]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Estimate, standard error, statistic and p-value per term.
pub fn coefficient_table(rows: &[(String, &Coefficient)], statistic: &str) -> String {
    let header = vec![
        String::new(),
        "Estimate".into(),
        "Std. Error".into(),
        format!("{statistic} value"),
        format!("Pr(>|{statistic}|)"),
    ];
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, c)| {
            vec![
                label.clone(),
                number(c.estimate, 5),
                number(c.std_error, 5),
                number(c.statistic, 3),
                format_p(c.p_value),
            ]
        })
        .collect();
    aligned(&header, &body)
}

fn f_line(f: &FTest) -> String {
    let p = if f.p_value < P_FLOOR {
        "< 2.2e-16".to_string()
    } else {
        signif_p(f.p_value)
    };
    format!(
        "F-statistic: {} on {} and {} DF,  p-value: {p}",
        signif(f.value, 4),
        f.df1,
        f.df2
    )
}

/// Three significant digits, scientific below 1e-4.
fn signif_p(p: f64) -> String {
    if p < 1e-4 {
        sci(p, 2)
    } else {
        signif(p, 3)
    }
}

pub fn stats_footer(stats: &FitStats) -> String {
    match stats {
        FitStats::Gaussian {
            sigma,
            df_residual,
            r_squared,
            adj_r_squared,
            f_test,
            ..
        } => {
            let mut s = format!(
                "Residual standard error: {} on {df_residual} degrees of freedom\n\
                 Multiple R-squared:  {},\tAdjusted R-squared:  {}\n",
                signif(*sigma, 4),
                signif(*r_squared, 4),
                signif(*adj_r_squared, 4)
            );
            if let Some(f) = f_test {
                s.push_str(&f_line(f));
                s.push('\n');
            }
            s
        }
        FitStats::Binomial {
            null_deviance,
            residual_deviance,
            aic,
            df_null,
            df_residual,
            iterations,
        } => format!(
            "    Null deviance: {}  on {df_null}  degrees of freedom\n\
             Residual deviance: {}  on {df_residual}  degrees of freedom\n\
             AIC: {}\n\nNumber of Fisher Scoring iterations: {iterations}\n",
            signif(*null_deviance, 4),
            signif(*residual_deviance, 4),
            signif(*aic, 4)
        ),
    }
}

/// Terms down, parts across, estimates flagged with `*` when significant.
pub fn estimate_matrix(parts: &[String], terms: &[String], cells: &[Vec<&Coefficient>]) -> String {
    let mut header = vec![String::new()];
    header.extend(parts.iter().cloned());
    let body: Vec<Vec<String>> = terms
        .iter()
        .enumerate()
        .map(|(i, term)| {
            let mut row = vec![term.clone()];
            for col in cells {
                let c = col[i];
                let star = if c.significant { "*" } else { " " };
                row.push(format!("{}{star}", number(c.estimate, 5)));
            }
            row
        })
        .collect();
    aligned(&header, &body)
}

pub fn variation_table(vm: &VariationMatrix) -> String {
    let mut header = vec![String::new()];
    header.extend(vm.part_names.iter().cloned());
    let body: Vec<Vec<String>> = (0..vm.dim())
        .map(|i| {
            let mut row = vec![vm.part_names[i].clone()];
            row.extend((0..vm.dim()).map(|j| number(vm.get(i, j), 5)));
            row
        })
        .collect();
    aligned(&header, &body)
}
