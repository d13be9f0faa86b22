"""Allocation-free inner loop of the plant integration.

One call advances the machine through one switching period on the fixed
integration grid.  Per step the converter output is recomputed from the
commanded switch state and the instantaneous sign of the faulty phase
current, then held across the four Runge-Kutta stages.  Trace columns
are written in place; the five-element state vector is updated in
place as well.
"""

import math

import numpy as np
from numba import njit

_TWO_THIRDS_PI = 2.0943951023931953
_INV_SQRT3 = 0.5773502691896258


@njit(cache=True)
def integrate_period(y, steps, negate_sel, volt_mats, fault_idx, eps_i, u_dc,
                     l_inv, r_s, n_p, psi_pm, phi_pm, theta_tot, m_load,
                     lock_speed, h, row0,
                     tr_i, tr_idq, tr_u, tr_omega, tr_mm, tr_mload):
    """y = [i_a, i_b, i_c, omega_m, phi_m]; steps is (n, 3) int8.

    volt_mats stacks the three phase-voltage maps for faulty-current
    sign -1, 0, +1; fault_idx < 0 selects plain healthy operation
    (index 0 is then the healthy map).
    """
    third = u_dc / 3.0
    npf = float(n_p)

    def rates(ia, ib, ic, om, ph, ua, ub, uc):
        el = npf * (ph + phi_pm)
        sa = math.sin(el)
        sb = math.sin(el - _TWO_THIRDS_PI)
        sc = math.sin(el + _TWO_THIRDS_PI)
        k = npf * om * psi_pm
        va = ua - r_s * ia + k * sa
        vb = ub - r_s * ib + k * sb
        vc = uc - r_s * ic + k * sc
        da = l_inv[0, 0] * va + l_inv[0, 1] * vb + l_inv[0, 2] * vc
        db = l_inv[1, 0] * va + l_inv[1, 1] * vb + l_inv[1, 2] * vc
        dc = l_inv[2, 0] * va + l_inv[2, 1] * vb + l_inv[2, 2] * vc
        mm = -npf * psi_pm * (ia * sa + ib * sb + ic * sc)
        dom = 0.0 if lock_speed else (mm + m_load) / theta_tot
        return da, db, dc, dom, om, mm

    for j in range(steps.shape[0]):
        ia = y[0]
        ib = y[1]
        ic = y[2]
        om = y[3]
        ph = y[4]

        s0 = float(steps[j, 0])
        s1 = float(steps[j, 1])
        s2 = float(steps[j, 2])
        if negate_sel:
            s0 = 1.0 - s0
            s1 = 1.0 - s1
            s2 = 1.0 - s2
        if fault_idx >= 0:
            ix = y[fault_idx]
            if ix < -eps_i:
                m = 0
            elif ix > eps_i:
                m = 2
            else:
                m = 1
        else:
            m = 0
        ua = third * (volt_mats[m, 0, 0] * s0 + volt_mats[m, 0, 1] * s1
                      + volt_mats[m, 0, 2] * s2)
        ub = third * (volt_mats[m, 1, 0] * s0 + volt_mats[m, 1, 1] * s1
                      + volt_mats[m, 1, 2] * s2)
        uc = third * (volt_mats[m, 2, 0] * s0 + volt_mats[m, 2, 1] * s1
                      + volt_mats[m, 2, 2] * s2)

        ka0, ka1, ka2, ka3, ka4, mm = rates(ia, ib, ic, om, ph, ua, ub, uc)

        row = row0 + j
        tr_i[row, 0] = ia
        tr_i[row, 1] = ib
        tr_i[row, 2] = ic
        el = npf * (ph + phi_pm)
        ce = math.cos(el)
        se = math.sin(el)
        ial = (2.0 * ia - ib - ic) / 3.0
        ibe = (ib - ic) * _INV_SQRT3
        tr_idq[row, 0] = ce * ial + se * ibe
        tr_idq[row, 1] = -se * ial + ce * ibe
        tr_u[row, 0] = ua
        tr_u[row, 1] = ub
        tr_u[row, 2] = uc
        tr_omega[row] = om
        tr_mm[row] = mm
        tr_mload[row] = -mm if lock_speed else m_load

        hh = 0.5 * h
        kb0, kb1, kb2, kb3, kb4, _ = rates(ia + hh * ka0, ib + hh * ka1,
                                           ic + hh * ka2, om + hh * ka3,
                                           ph + hh * ka4, ua, ub, uc)
        kc0, kc1, kc2, kc3, kc4, _ = rates(ia + hh * kb0, ib + hh * kb1,
                                           ic + hh * kb2, om + hh * kb3,
                                           ph + hh * kb4, ua, ub, uc)
        kd0, kd1, kd2, kd3, kd4, _ = rates(ia + h * kc0, ib + h * kc1,
                                           ic + h * kc2, om + h * kc3,
                                           ph + h * kc4, ua, ub, uc)
        w = h / 6.0
        y[0] = ia + w * (ka0 + 2.0 * (kb0 + kc0) + kd0)
        y[1] = ib + w * (ka1 + 2.0 * (kb1 + kc1) + kd1)
        y[2] = ic + w * (ka2 + 2.0 * (kb2 + kc2) + kd2)
        y[3] = om + w * (ka3 + 2.0 * (kb3 + kc3) + kd3)
        y[4] = ph + w * (ka4 + 2.0 * (kb4 + kc4) + kd4)
