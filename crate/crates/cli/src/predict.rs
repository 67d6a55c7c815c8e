use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use log::warn;
use penreg::artifact::ModelArtifact;
use penreg::ingest::{field_count, is_blank, parse_columns, parse_header};

use crate::cli::PredictArgs;
use crate::{exit, parse_delimiter, Failure};

/// Where to find the features (and, optionally, the response) in a row.
struct InputSchema {
    width: usize,
    features: Vec<usize>,
    response: Option<usize>,
}

fn schema_from_header(header: &[String], artifact: &ModelArtifact) -> Result<InputSchema, Failure> {
    let mut missing = Vec::new();
    let mut features = Vec::new();
    for c in &artifact.coefficients {
        match header.iter().position(|h| h == &c.name) {
            Some(i) => features.push(i),
            None => missing.push(c.name.clone()),
        }
    }
    if !missing.is_empty() {
        return Err(Failure::new(
            exit::SCHEMA,
            format!("input is missing columns: {}", missing.join(", ")),
        ));
    }
    let response = header
        .iter()
        .position(|h| h == &artifact.ingest.layout.response_name);
    Ok(InputSchema {
        width: header.len(),
        features,
        response,
    })
}

fn schema_from_width(width: usize, artifact: &ModelArtifact) -> Result<InputSchema, Failure> {
    let layout = &artifact.ingest.layout;
    let p = artifact.coefficients.len();
    if width == layout.width {
        Ok(InputSchema {
            width,
            features: layout.feature_indices.clone(),
            response: Some(layout.response_index),
        })
    } else if width == p {
        Ok(InputSchema {
            width,
            features: (0..p).collect(),
            response: None,
        })
    } else {
        Err(Failure::new(
            exit::SCHEMA,
            format!(
                "rows have {width} fields; expected {} (training layout) or {p} (features only)",
                layout.width
            ),
        ))
    }
}

pub fn cmd_predict(args: PredictArgs) -> Result<(), Failure> {
    let artifact = ModelArtifact::read(&args.model).map_err(|e| Failure::new(exit::USAGE, e))?;
    let model = artifact.model();
    let delimiter = parse_delimiter(&args.delimiter)?;
    let file = File::open(&args.input)
        .map_err(|e| Failure::new(exit::INGEST, format!("{}: {e}", args.input.display())))?;
    let mut reader = BufReader::new(file);
    let mut out: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::new(exit::OUTPUT, format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    // A closed downstream pipe (`predict | head`) ends the run quietly.
    let write_err = |e: std::io::Error| match e.kind() {
        std::io::ErrorKind::BrokenPipe => Failure::new(exit::PIPE_CLOSED, e),
        _ => Failure::new(exit::OUTPUT, e),
    };

    let mut schema: Option<InputSchema> = None;
    let mut line = Vec::new();
    let mut values = vec![0.0; model.coefficients.len()];
    let mut response = [0.0];
    let (mut total, mut rejected) = (0u64, 0u64);
    let (mut sse, mut scored) = (0.0, 0u64);
    loop {
        line.clear();
        let read = reader
            .read_until(b'\n', &mut line)
            .map_err(|e| Failure::new(exit::INGEST, e))?;
        if read == 0 {
            break;
        }
        if is_blank(&line) {
            continue;
        }
        let text = String::from_utf8_lossy(&line);
        let text = text.trim_end_matches(['\n', '\r']);
        if schema.is_none() {
            if !args.no_header {
                let header = parse_header(&line, delimiter).map_err(|e| Failure::new(exit::SCHEMA, e))?;
                schema = Some(schema_from_header(&header, &artifact)?);
                if args.append {
                    writeln!(out, "{text}{}prediction", delimiter as char).map_err(write_err)?;
                }
                continue;
            }
            schema = Some(schema_from_width(field_count(&line, delimiter), &artifact)?);
        }
        let s = schema.as_ref().expect("schema resolved");
        total += 1;
        let prediction = match parse_columns(&line, delimiter, s.width, &s.features, &mut values) {
            Ok(()) => Some(model.predict(&values)),
            Err(rejection) => {
                rejected += 1;
                warn!("row {total}: {rejection}; no prediction");
                None
            }
        };
        if let (Some(pred), Some(col)) = (prediction, s.response) {
            if parse_columns(&line, delimiter, s.width, &[col], &mut response).is_ok() {
                sse += (response[0] - pred).powi(2);
                scored += 1;
            }
        }
        let rendered = prediction.map_or(String::new(), |p| p.to_string());
        if args.append {
            writeln!(out, "{text}{}{rendered}", delimiter as char).map_err(write_err)?;
        } else {
            writeln!(out, "{rendered}").map_err(write_err)?;
        }
    }
    out.flush().map_err(write_err)?;

    if scored > 0 {
        eprintln!("mse {}", sse / scored as f64);
    }
    if total > 0 && rejected as f64 > args.rejection_cap * total as f64 {
        return Err(Failure::new(
            exit::INGEST,
            format!("rejected {rejected} of {total} rows, above the cap of {}", args.rejection_cap),
        ));
    }
    Ok(())
}
