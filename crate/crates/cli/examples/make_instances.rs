//! Regenerates the instance files in `instances/`.
//!
//! cargo run -p cstar-descent-cli --example make_instances -- crates/cli/instances

use cstar_descent::comodule::{comparison, Comodule};
use cstar_descent::connection::{auto_frame, comodule_to_connection, grassmann_connection, Dictionary};
use cstar_descent::gallery::{self, Instance, Source};
use cstar_descent::instance::{connection_full, from_gallery, matrix_data, module_data, ConnectionData, InstanceFile};
use cstar_descent::module::HilbertModule;
use cstar_descent::{Result, Tolerance};
use rand::SeedableRng;
use std::path::{Path, PathBuf};

fn source(name: &str) -> Source {
    gallery::standard_sources().into_iter().find(|(n, _)| n == name).expect("gallery name").1
}

fn write(dir: &Path, file: &InstanceFile) {
    let path = dir.join(format!("{}.json", file.name));
    std::fs::write(&path, file.emit() + "\n").expect("writable");
    println!("wrote {}", path.display());
}

/// Gallery instance with the comparison comodule of `x` and its connection.
fn with_comodule(inst: &Instance<f64>, x: &HilbertModule<f64>, name: &str) -> Result<(InstanceFile, Comodule<f64>)> {
    let co = inst.coalgebra()?;
    let z = comparison(x, &co)?.comodule;
    let mut file = from_gallery(inst, &[("Z", &z)], Some(&co))?;
    file.name = name.into();
    if let Some(om) = inst.omega(co.clone()) {
        let om = om?;
        let (conn, dict) = comodule_to_connection(&z, &om)?;
        file.connections.push(ConnectionData {
            name: "nabla".into(),
            module: "Z.module".into(),
            inclusion: "inc".into(),
            nabla: matrix_data(&connection_full(&conn, &dict, &co)),
        });
    }
    Ok((file, z))
}

fn main() -> Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "crates/cli/instances".into());
    std::fs::create_dir_all(&dir).expect("output directory");
    let tol = Tolerance::default_for::<f64>();

    // Three points over two, fibers {0, 1} and {2}; Z pulls back a bundle of rank (1, 2).
    let cov = Instance::<f64>::build("covering-3-2", source("covering-3-2"), tol)?;
    let Source::Covering(c) = &cov.source else { unreachable!() };
    let x = gallery::bundle(cov.sub().clone(), &c.base_dims().expect("constant on fibers"), tol)?;
    let (mut file, z) = with_comodule(&cov, &x, "covering")?;
    file.modules.insert(2, module_data("bundle", "A", &x));
    write(&dir, &file);

    let mut scaled = file.clone();
    scaled.name = "scaled_coaction".into();
    scaled.connections.clear();
    for row in scaled.comodules[0].coaction.iter_mut() {
        for e in row.iter_mut() {
            *e = [2.0 * e[0], 2.0 * e[1]];
        }
    }
    write(&dir, &scaled);

    let co = cov.coalgebra()?;
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let p = gallery::random_b_positive(&z.module, &mut rng);
    let bent = gallery::twist(&z, &p, &co)?;
    let mut not_herm = from_gallery(&cov, &[("Z", &bent)], Some(&co))?;
    not_herm.name = "not_hermitian".into();
    write(&dir, &not_herm);

    let z2 = Instance::<f64>::build("group-z2", source("group-z2"), tol)?;
    let a = HilbertModule::over_itself(z2.sub().clone(), tol)?;
    write(&dir, &with_comodule(&z2, &a, "group_z2")?.0);

    let m2 = Instance::<f64>::build("scalar-m2", source("scalar-m2"), tol)?;
    let a = HilbertModule::over_itself(m2.sub().clone(), tol)?;
    write(&dir, &with_comodule(&m2, &a, "scalar_m2")?.0);

    // The column module ℂ² over M₂, written as row vectors so M₂ acts on the right,
    // with the Grassmann connection of the Gram frame.
    let co = m2.coalgebra()?;
    let om = m2.omega(co.clone()).expect("inclusion")?;
    let b = m2.correspondence.module.algebra().clone();
    let row = HilbertModule::row(b, tol)?;
    let conn = grassmann_connection(row.clone(), &auto_frame(&row)?, &om)?;
    let dict = Dictionary::new(row.clone(), &om)?;
    let mut file = from_gallery(&m2, &[], None)?;
    file.name = "column_m2".into();
    file.modules.push(module_data("column", "B", &row));
    file.connections.push(ConnectionData {
        name: "grassmann".into(),
        module: "column".into(),
        inclusion: "inc".into(),
        nabla: matrix_data(&connection_full(&conn, &dict, &co)),
    });
    write(&dir, &file);
    Ok(())
}
