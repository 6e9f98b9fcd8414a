"""Integer codes and array layouts shared by the compiled and Python loops."""

COLUMNS = ("t", "x1", "x2", "r", "dr", "e1", "e2", "p", "mu", "xhat1", "xhat2")
(COL_T, COL_X1, COL_X2, COL_R, COL_DR, COL_E1, COL_E2, COL_P, COL_MU,
 COL_XHAT1, COL_XHAT2) = range(len(COLUMNS))

REF_NONE, REF_QUINTIC, REF_CONSTANT = 0, 1, 2
CTRL_NONE, CTRL_CONSTANT, CTRL_CTA, CTRL_DIA, CTRL_ELQR = 0, 1, 2, 3, 4
CTRL_CODES = {"none": CTRL_NONE, "constant": CTRL_CONSTANT, "cta": CTRL_CTA,
              "dia": CTRL_DIA, "elqr": CTRL_ELQR}

STATUS_OK, STATUS_BLOWUP = 0, 1

# plant = (N_hat, k_hat, eta_hat, sigma_n, mu_res, delta_mu, d_c)
# pert  = (a_sin, omega, b_x1, b_x2, c_const)
# ref   = (d_max, t_op, r0)
# ctrl  = (g1, g2, g3, g4, lam, mu0*N_hat0, p_const, p_limit, lambda_d)
# p_limit <= 0 disables clipping.
PLANT_LEN, PERT_LEN, REF_LEN, CTRL_LEN = 7, 5, 3, 9
