use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

use super::alist::{parse_alist, write_alist};
use super::base_graph::parse_base_graph;
use super::generator::{derive_generator, GeneratorFile, GeneratorMatrix};
use super::parity::{lift, ParityCheck};
use super::tanner::TannerGraph;

/// 5G NR base graph 2 shift table for lifting set 2 (the set containing z = 10).
pub const BG2_CSV: &str = include_str!("../../assets/bg2_ils2.csv");
pub const BG2_LIFTING: usize = 10;

const ALIST_FILE: &str = "code.alist";
const GENERATOR_FILE: &str = "generator.json";

#[derive(Serialize, Deserialize)]
struct Sidecar {
    code_id: String,
    generator: GeneratorFile,
}

/// A parity-check matrix together with its encoder and Tanner graph.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    id: String,
    h: ParityCheck,
    graph: TannerGraph,
    generator: GeneratorMatrix,
}

impl LdpcCode {
    pub fn from_parity_check(id: impl Into<String>, h: ParityCheck) -> Result<Self> {
        let generator = derive_generator(&h)?;
        Ok(Self::assemble(id.into(), h, generator))
    }

    fn assemble(id: String, h: ParityCheck, generator: GeneratorMatrix) -> Self {
        let graph = TannerGraph::new(&h);
        LdpcCode {
            id,
            h,
            graph,
            generator,
        }
    }

    /// The lifted 5G BG2 code with `z = 10`: n = 520, k = 100.
    pub fn bg2() -> Self {
        Self::bg2_lifted(BG2_LIFTING).expect("bundled BG2 asset is valid")
    }

    pub fn bg2_lifted(z: usize) -> Result<Self> {
        let bg = parse_base_graph(BG2_CSV)?;
        let h = lift(&bg, z)?;
        Self::from_parity_check(format!("5g-bg2-ils{}-z{z}", bg.lifting_set_id), h)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    pub fn k(&self) -> usize {
        self.generator.k()
    }

    pub fn parity_check(&self) -> &ParityCheck {
        &self.h
    }

    pub fn graph(&self) -> &TannerGraph {
        &self.graph
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn encode(&self, message: &BitVector) -> Result<BitVector> {
        self.generator.encode(message)
    }

    pub fn extract(&self, codeword: &BitVector) -> Result<BitVector> {
        self.generator.extract(codeword)
    }

    /// Writes `code.alist` and the `generator.json` sidecar into `dir`.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(ALIST_FILE), write_alist(&self.h))?;
        let sidecar = Sidecar {
            code_id: self.id.clone(),
            generator: self.generator.to_file(),
        };
        std::fs::write(
            dir.join(GENERATOR_FILE),
            serde_json::to_string_pretty(&sidecar)? + "\n",
        )?;
        Ok(())
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let h = parse_alist(&std::fs::read_to_string(dir.join(ALIST_FILE))?)?;
        let sidecar: Sidecar =
            serde_json::from_str(&std::fs::read_to_string(dir.join(GENERATOR_FILE))?)?;
        let generator = GeneratorMatrix::from_file(sidecar.generator)?;
        if generator.n() != h.n() {
            return Err(Error::Validation("generator length differs from alist".into()));
        }
        for p in generator.parity_positions().iter().chain(generator.info_positions()) {
            if *p >= h.n() {
                return Err(Error::Validation(format!("generator position {p} out of range")));
            }
        }
        let code = Self::assemble(sidecar.code_id, h, generator);
        // A sidecar that does not match the alist would silently mis-encode.
        for i in 0..code.k().min(8) {
            let mut e = BitVector::zeros(code.k());
            e.set(i, true);
            if !code.h.is_codeword(&code.encode(&e)?)? {
                return Err(Error::Validation("generator sidecar does not match alist".into()));
            }
        }
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prng::SplitMix64;

    #[test]
    fn bg2_geometry() {
        let bg = parse_base_graph(BG2_CSV).unwrap();
        assert_eq!((bg.rows, bg.cols, bg.entries.len()), (42, 52, 197));
        let code = LdpcCode::bg2();
        assert_eq!(code.n(), 520);
        assert_eq!(code.parity_check().r(), 420);
        assert_eq!(code.parity_check().edge_count(), 1970);
        assert_eq!(code.k(), 100);
    }

    #[test]
    fn edges_scale_with_lifting() {
        let bg = parse_base_graph(BG2_CSV).unwrap();
        for z in [1, 2, 3, 7, 10, 16] {
            assert_eq!(lift(&bg, z).unwrap().edge_count(), 197 * z);
        }
    }

    #[test]
    fn random_messages_encode_to_codewords() {
        let code = LdpcCode::bg2();
        let mut rng = SplitMix64::new(99);
        for _ in 0..20 {
            let m = BitVector::from_bools((0..100).map(|_| rng.next_bool()));
            let c = code.encode(&m).unwrap();
            assert!(code.parity_check().syndrome(&c).unwrap().count_ones() == 0);
            assert_eq!(code.extract(&c).unwrap(), m);
        }
    }

    #[test]
    fn directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let code = LdpcCode::bg2();
        code.save_dir(dir.path()).unwrap();
        let back = LdpcCode::load_dir(dir.path()).unwrap();
        assert_eq!(back.parity_check(), code.parity_check());
        assert_eq!(back.generator(), code.generator());
        assert_eq!(back.id(), code.id());
    }
}
