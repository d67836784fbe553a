"""Concrete models: the exact de Rham model and the bc ghost system."""

# Operations exposed to the command line.
API = ("derham_apply", "eval_op", "model_residual", "lz_model", "bc_axioms_check", "bc_lz",
       "bc_verify_prop21")
