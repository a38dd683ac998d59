//! Straight-line model of one diffusion iteration, written from the model
//! description without reusing any engine code. Only the network accessors
//! of the library are used, to read the edge lists.

#![allow(clippy::needless_range_loop)]

use greenspread::netgen::MultilayerNetwork;

pub struct Reference {
    n_banks: usize,
    n_firms: usize,
    bank_nbrs: Vec<Vec<usize>>,
    firm_nbrs: Vec<Vec<usize>>,
    bank_firms: Vec<Vec<usize>>,
    firm_banks: Vec<Vec<usize>>,
}

impl Reference {
    pub fn new(net: &MultilayerNetwork) -> Self {
        let (nb, nf) = (net.n_banks(), net.n_firms());
        let mut r = Reference {
            n_banks: nb,
            n_firms: nf,
            bank_nbrs: vec![Vec::new(); nb],
            firm_nbrs: vec![Vec::new(); nf],
            bank_firms: vec![Vec::new(); nb],
            firm_banks: vec![Vec::new(); nf],
        };
        for &(a, b) in net.bank_edges() {
            r.bank_nbrs[a as usize].push(b as usize);
            r.bank_nbrs[b as usize].push(a as usize);
        }
        for &(a, b) in net.firm_edges() {
            r.firm_nbrs[a as usize].push(b as usize);
            r.firm_nbrs[b as usize].push(a as usize);
        }
        for &(b, f) in net.interlayer_edges() {
            r.bank_firms[b as usize].push(f as usize);
            r.firm_banks[f as usize].push(b as usize);
        }
        for list in r
            .bank_nbrs
            .iter_mut()
            .chain(r.firm_nbrs.iter_mut())
            .chain(r.bank_firms.iter_mut())
            .chain(r.firm_banks.iter_mut())
        {
            list.sort_unstable();
        }
        r
    }

    /// Sum over neighbours of (deg_j / sum of neighbour degrees) * GL_j.
    fn influence(
        nbrs: &[usize],
        deg_of: &dyn Fn(usize) -> usize,
        gl_of: &dyn Fn(usize) -> f64,
    ) -> f64 {
        let total: usize = nbrs.iter().map(|&j| deg_of(j)).sum();
        let mut l = 0.0;
        for &j in nbrs {
            let d = deg_of(j) as f64 / total as f64;
            l += d * gl_of(j);
        }
        l
    }

    /// Trajectory of (bank levels, firm levels) for alpha in {0, 1}, every
    /// bank selected.
    pub fn run(
        &self,
        alpha: f64,
        delta: f64,
        eit: u32,
        lt: f64,
        steps: u32,
    ) -> Vec<(Vec<f64>, Vec<f64>)> {
        assert!(alpha == 0.0 || alpha == 1.0);
        let mut banks = vec![0.0; self.n_banks];
        let mut firms = vec![0.0; self.n_firms];
        let mut out = vec![(banks.clone(), firms.clone())];
        for t in 0..steps {
            // 1. external influence
            if t < eit && alpha == 1.0 {
                for b in banks.iter_mut() {
                    *b = f64::min(1.0, *b + delta);
                }
            }
            let mut bank_pending: Vec<Vec<f64>> = vec![Vec::new(); self.n_banks];
            let mut firm_pending: Vec<Vec<f64>> = vec![Vec::new(); self.n_firms];
            // 2. banks, bank layer
            for b in 0..self.n_banks {
                let l = Self::influence(&self.bank_nbrs[b], &|j| self.bank_nbrs[j].len(), &|j| {
                    banks[j]
                });
                if l > lt {
                    bank_pending[b].push(delta);
                }
            }
            // 3. banks, their firms
            for b in 0..self.n_banks {
                let l = Self::influence(&self.bank_firms[b], &|j| self.firm_banks[j].len(), &|j| {
                    firms[j]
                });
                if l > lt {
                    bank_pending[b].push(delta);
                }
            }
            // 4. firms, company layer
            for f in 0..self.n_firms {
                let l = Self::influence(&self.firm_nbrs[f], &|j| self.firm_nbrs[j].len(), &|j| {
                    firms[j]
                });
                if l > lt {
                    firm_pending[f].push(delta);
                }
            }
            // 5. firms, their banks
            for f in 0..self.n_firms {
                let l = Self::influence(&self.firm_banks[f], &|j| self.bank_firms[j].len(), &|j| {
                    banks[j]
                });
                if l > lt {
                    firm_pending[f].push(delta);
                }
            }
            // 6. update
            for (g, p) in banks.iter_mut().zip(&bank_pending) {
                if !p.is_empty() {
                    *g = f64::min(1.0, *g + p.iter().sum::<f64>());
                }
            }
            for (g, p) in firms.iter_mut().zip(&firm_pending) {
                if !p.is_empty() {
                    *g = f64::min(1.0, *g + p.iter().sum::<f64>());
                }
            }
            out.push((banks.clone(), firms.clone()));
        }
        out
    }
}
