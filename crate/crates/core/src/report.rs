//! CSV writers. Real values are rounded to six significant digits so output
//! is stable across platforms.

use std::io::Write;

use crate::coeff::CoefficientHistogram;
use crate::quant::RdCurvePoint;
use crate::rd::ModelTraceRow;
use crate::sim::{PlanRow, SimFrameRecord};
use crate::Result;

/// `x` rounded to six significant digits. Non-finite values pass through.
pub fn round6(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

/// Six-significant-digit text form; `nan` for missing values.
pub fn fmt6(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{}", round6(x))
    }
}

pub fn write_histogram_csv<W: Write>(hist: &CoefficientHistogram, out: W) -> Result<()> {
    Ok(hist.write_csv(out)?)
}

pub fn write_rd_curve_csv<W: Write>(rows: &[RdCurvePoint], mut out: W) -> Result<()> {
    writeln!(out, "qp,q_step,entropy_bits,distortion")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            r.qp,
            fmt6(r.q_step),
            fmt6(r.entropy_bits),
            fmt6(r.distortion)
        )?;
    }
    Ok(())
}

/// Frame records in the order given.
pub fn write_frames_csv<W: Write>(records: &[&SimFrameRecord], mut out: W) -> Result<()> {
    writeln!(out, "poc,level,slice,qp,lambda,bits,bpp,psnr,skip_ratio")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.poc,
            r.level,
            r.slice.as_str(),
            r.qp,
            fmt6(r.lambda),
            fmt6(r.bits),
            fmt6(r.bpp()),
            fmt6(r.psnr_db),
            fmt6(r.skip_ratio)
        )?;
    }
    Ok(())
}

pub fn write_plan_csv<W: Write>(rows: &[PlanRow], mut out: W) -> Result<()> {
    writeln!(out, "gop,poc,level,qp,lambda,target_bpp,actual_bpp")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.gop,
            r.poc,
            r.level,
            r.qp,
            fmt6(r.lambda),
            fmt6(r.target_bpp),
            fmt6(r.actual_bpp)
        )?;
    }
    Ok(())
}

pub fn write_trace_csv<W: Write>(rows: &[ModelTraceRow], mut out: W) -> Result<()> {
    writeln!(out, "poc,level,qp_candidate,r_hat,d_hat,lambda")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.poc,
            r.level,
            r.qp_candidate,
            fmt6(r.r_hat),
            fmt6(r.d_hat),
            fmt6(r.lambda)
        )?;
    }
    Ok(())
}
