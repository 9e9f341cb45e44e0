//! Flat binary and CSV export of grid functions.
//!
//! Binary layout (little endian): magic `VPGF`, `u32` version, `u32` n,
//! `n x u64` shape, `n x f64` lower corner, `n x f64` spacing, `u32`
//! components, `u8` domain kind, then `f64` values in C order with
//! components interleaved per node.

use std::io::{Read, Write};

use crate::error::{Error, Result};

use super::{BoxDomain, DomainKind, Grid, GridFunction, MAX_DIM};

const MAGIC: &[u8; 4] = b"VPGF";
const VERSION: u32 = 1;

fn kind_code(kind: DomainKind) -> u8 {
    match kind {
        DomainKind::WholeSpace => 0,
        DomainKind::HalfSpace => 1,
        DomainKind::BoundedBox => 2,
    }
}

pub fn write_grid_function(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let g = f.grid();
    let n = g.dim();
    let mut buf = Vec::with_capacity(64 + f.values().len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(n as u32).to_le_bytes());
    for &m in g.shape() {
        buf.extend_from_slice(&(m as u64).to_le_bytes());
    }
    for &x in g.domain().lower() {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    for &h in g.spacing() {
        buf.extend_from_slice(&h.to_le_bytes());
    }
    buf.extend_from_slice(&(f.components() as u32).to_le_bytes());
    buf.push(kind_code(g.domain().kind()));
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.data.len() {
            return Err(Error::Format("unexpected end of file".into()));
        }
        let s = &self.data[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn read_grid_function(mut r: impl Read) -> Result<GridFunction> {
    let mut data = Vec::new();
    r.read_to_end(&mut data)?;
    let mut c = Cursor { data: &data, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let n = c.u32()? as usize;
    if n == 0 || n > MAX_DIM {
        return Err(Error::Format(format!("dimension {n}")));
    }
    let shape = (0..n)
        .map(|_| c.u64().map(|m| m as usize))
        .collect::<Result<Vec<_>>>()?;
    let lower = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let spacing = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    let components = c.u32()? as usize;
    let kind = match c.take(1)?[0] {
        0 => DomainKind::WholeSpace,
        1 => DomainKind::HalfSpace,
        2 => DomainKind::BoundedBox,
        k => return Err(Error::Format(format!("domain kind {k}"))),
    };
    if shape.iter().any(|&m| m < 2) {
        return Err(Error::Format("axis with fewer than two nodes".into()));
    }
    let upper: Vec<f64> = (0..n)
        .map(|a| lower[a] + (shape[a] - 1) as f64 * spacing[a])
        .collect();
    let grid = Grid::with_shape(BoxDomain::new(&lower, &upper, kind)?, &shape)?;
    let count = grid.node_count() * components;
    if data.len() - c.pos != count * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, expected {}",
            data.len() - c.pos,
            count * 8
        )));
    }
    let values = (0..count).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    GridFunction::new(grid, components, values)
}

/// One row per node: coordinates followed by component values.
pub fn write_csv(f: &GridFunction, mut w: impl Write) -> Result<()> {
    let g = f.grid();
    let n = g.dim();
    let mut header: Vec<String> = (0..n).map(|a| format!("x{a}")).collect();
    header.extend((0..f.components()).map(|c| format!("f{c}")));
    writeln!(w, "{}", header.join(","))?;
    for lin in 0..g.node_count() {
        let x = g.point(lin);
        let row: Vec<String> = x[..n]
            .iter()
            .chain(f.node(lin))
            .map(|v| format!("{v:e}"))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let dom = BoxDomain::half_space(3, 1.0, 1.0).unwrap();
        let g = Grid::new(dom, 0.25).unwrap();
        let f = GridFunction::from_fn_vec(&g, 2, |x, o| {
            o[0] = x[0] + 2.0 * x[2];
            o[1] = x[1].sin();
        });
        let mut buf = Vec::new();
        write_grid_function(&f, &mut buf).unwrap();
        let back = read_grid_function(buf.as_slice()).unwrap();
        assert_eq!(back.values(), f.values());
        assert_eq!(back.grid().shape(), f.grid().shape());
        assert_eq!(back.grid().domain().kind(), DomainKind::HalfSpace);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dom = BoxDomain::cube(2, 0.0, 1.0, DomainKind::BoundedBox).unwrap();
        let f = GridFunction::zeros(&Grid::new(dom, 0.5).unwrap(), 1);
        let mut buf = Vec::new();
        write_grid_function(&f, &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_grid_function(buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn csv_has_one_row_per_node() {
        let dom = BoxDomain::cube(2, 0.0, 1.0, DomainKind::BoundedBox).unwrap();
        let g = Grid::new(dom, 0.5).unwrap();
        let f = GridFunction::from_fn(&g, |x| x[0]);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 9);
        assert!(text.starts_with("x0,x1,f0"));
    }
}
