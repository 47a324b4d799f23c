"""Independent high-precision oracle for the frozen physics values in the
Rust test suite. Evaluates the GN-model PSD term by term in SI units and the
4-QAM symbol error probability with mpmath's erfc.

Run: python3 physics_oracle.py
"""
from mpmath import mp, mpf, log, pi, erfc, sqrt, ln

mp.dps = 50

# Fibre and launch constants, converted to SI by hand.
gamma = mpf("1.33") / 1000                    # 1/(W m)
alpha = mpf("0.2") * ln(10) / 10 / 1000       # 1/m (power attenuation)
beta2 = mpf("-21.7") * mpf("1e-24") / 1000    # s^2/m
p_r = mpf(10) ** (mpf("-12") / 10) / 1000     # W


def gn_psd(center, bw, neighbours):
    g = p_r / bw
    pre = 3 * gamma**2 * g / (2 * pi * alpha * abs(beta2))
    acc = g**2 * log(abs(pi**2 * beta2 * bw**2 / alpha))
    for (fc, b) in neighbours:
        gn = p_r / b
        sep = abs(center - fc)
        acc += gn**2 * log((sep + b / 2) / (sep - b / 2))
    return pre * acc


def q(x):
    return erfc(x / sqrt(2)) / 2


def ser(s):
    t = q(sqrt(s))
    return 2 * t * (1 - t / 2)


if __name__ == "__main__":
    print("single_32ghz_psd", mp.nstr(gn_psd(0, mpf("32e9"), []), 20))
    print("neighbour_50ghz_psd", mp.nstr(gn_psd(0, mpf("32e9"), [(mpf("50e9"), mpf("32e9"))]), 20))
    # slot-grid fixture: 12.5 GHz slots, primary slots 1..3, neighbour slots 5..7
    w = mpf("12.5e9")
    c1, c2, b = w * mpf("1.5"), w * mpf("5.5"), 3 * w
    p1 = gn_psd(c1, b, []) * b
    p2 = gn_psd(c1, b, [(c2, b)]) * b
    print("grid_lone_power_1span", mp.nstr(p1, 20))
    print("grid_neighbour_power_1span", mp.nstr(p2, 20))
    for s in [0, 10, 32, 100]:
        print("ser", s, mp.nstr(ser(mpf(s)), 25))
