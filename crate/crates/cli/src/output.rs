use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use singtrace::asymptotics::MeanProfile;
use singtrace::estimators::{HeatSamples, ZetaSamples};
use singtrace::numeric::format_exp;

use crate::CliError;

/// Pretty JSON with every float written to 17 significant digits.
struct SciFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for SciFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Internal(format!("serializing the report: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| CliError::Internal(e.to_string()))
}

/// Writes `text` to `path`, or to stdout without one.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| {
            CliError::Core(singtrace::Error::Io {
                path: p.to_path_buf(),
                source,
            })
        }),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Internal(format!("writing to stdout: {e}")))
        }
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Series CSV: one row per Cesaro grid point. Heat and zeta samples live on
/// their own grids and fill the leading rows in sample order; `heat` is
/// `F(lambda)` at `lambda = 2^k` for the configured `k` range.
pub fn series_csv(
    g: &MeanProfile,
    tail_cut: Option<&MeanProfile>,
    heat: Option<&HeatSamples>,
    zeta: Option<&ZetaSamples>,
) -> String {
    let mut s = String::from("t,g,tail_cut,heat,zeta_s,zeta_val\n");
    for i in 0..g.len() {
        let row = [
            format_exp(g.log_t()[i]),
            cell(Some(g.values()[i])),
            cell(tail_cut.and_then(|p| p.values().get(i).copied())),
            cell(heat.and_then(|h| h.values.get(i).copied())),
            cell(zeta.and_then(|z| z.s.get(i).copied())),
            cell(zeta.and_then(|z| z.values.get(i).copied())),
        ];
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}
