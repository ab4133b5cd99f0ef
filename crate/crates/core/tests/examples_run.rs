//! Every runnable example, executed as a test.

macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!($file);

            #[test]
            fn runs() {
                main();
            }
        }
    };
}

example!(sequences, "../examples/sequences.rs");
example!(obstructions, "../examples/obstructions.rs");
example!(riesz_gaps, "../examples/riesz_gaps.rs");
example!(chacon, "../examples/chacon.rs");
example!(rotation, "../examples/rotation.rs");
example!(odometer, "../examples/odometer.rs");
example!(config_run, "../examples/config_run.rs");
