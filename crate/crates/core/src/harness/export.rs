//! CSV and VTK output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::study::ConvergenceTable;
use crate::adapt::AfemRecord;
use crate::estimator::IndicatorField;
use crate::fem::Solution;
use crate::mesh::{io::save_vtk, Mesh};
use crate::{Error, Result};

/// A float with 12 significant digits, or an empty field.
fn num(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v:.11e}"))
}

pub fn write_table_csv(table: &ConvergenceTable, w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "j,dofs,h,diff,rate,estimator,error,iterations,seconds")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            r.level,
            r.dofs,
            num(Some(r.h)),
            num(r.diff),
            num(r.rate),
            num(r.estimator),
            num(r.error),
            r.solver_iterations,
            num(Some(r.seconds))
        )?;
    }
    Ok(())
}

pub fn write_records_csv(records: &[AfemRecord], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "j,dofs,elements,estimator,marked,seconds")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.iteration,
            r.dofs,
            r.elements,
            num(Some(r.estimator)),
            r.marked,
            num(Some(r.seconds))
        )?;
    }
    Ok(())
}

fn save_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn save_table_csv(table: &ConvergenceTable, path: &Path) -> Result<()> {
    save_with(path, |w| write_table_csv(table, w))
}

pub fn save_records_csv(records: &[AfemRecord], path: &Path) -> Result<()> {
    save_with(path, |w| write_records_csv(records, w))
}

/// Legacy VTK with the vertex values of `solution` as point data and the
/// indicator field as cell data, when given.
pub fn export_vtk(
    mesh: &Mesh,
    solution: Option<&Solution>,
    indicators: Option<&IndicatorField>,
    path: &Path,
) -> Result<()> {
    let point: Vec<(&str, &[f64])> = solution.map(|s| ("u", s.vertex_values())).into_iter().collect();
    let cell: Vec<(&str, &[f64])> = indicators
        .map(|f| (f.kind.name(), f.values.as_slice()))
        .into_iter()
        .collect();
    save_vtk(mesh, path, &point, &cell)
}
