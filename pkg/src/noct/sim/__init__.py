"""Numerical cross-validation: trajectory synthesis, IMU/camera
measurement generation, an error-state EKF with online extrinsic and
time-offset calibration, and convergence classification."""
