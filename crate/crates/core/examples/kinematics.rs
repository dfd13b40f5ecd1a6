//! Forward kinematics, the geometric Jacobian and damped least-squares
//! Cartesian steps on the UR5e model.
//!
//! cargo run --release --example kinematics

use nalgebra::Vector3;
use peghole::geometry::{ArmModel, CartesianStepper};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arm = ArmModel::ur5e();
    let tip = arm.forward_kinematics(&arm.home)?;
    let cam = arm.camera_pose(&arm.home)?;
    println!("home joints  {:?}", arm.home);
    println!("tip          {:.4?}", tip.position.as_slice());
    println!("camera       {:.4?}  looking along {:.3?}", cam.position.as_slice(), cam.z_axis().as_slice());

    let jac = arm.jacobian(&arm.home)?;
    println!("jacobian at home (rows: vx vy vz wx wy wz)\n{jac:.3}");

    // Walk the tip 10 cm down in 5 mm steps and report the tracking error.
    let stepper = CartesianStepper {
        hold_orientation: Some(tip.orientation),
        ..CartesianStepper::default()
    };
    let mut q = arm.home;
    let delta = Vector3::new(0.0, 0.0, -0.005);
    for _ in 0..20 {
        let inc = stepper.resolve(&arm, &q, &delta)?;
        for (qi, d) in q.iter_mut().zip(inc) {
            *qi += d;
        }
    }
    let end = arm.forward_kinematics(&q)?;
    let want = tip.position + Vector3::new(0.0, 0.0, -0.1);
    println!(
        "after 20 steps of 5 mm down: tip {:.4?}, error {:.3} mm, tilt {:.4} rad",
        end.position.as_slice(),
        1000.0 * (end.position - want).norm(),
        end.orientation.angle_to(&tip.orientation)
    );
    Ok(())
}
