import math
import os
import tempfile
import unittest

import numpy as np

import vibrow


class ModuleTest(unittest.TestCase):
    def test_effective_coupling(self):
        p = vibrow.ModelParams.canonical()
        om = vibrow.effective_coupling(p)
        self.assertAlmostEqual(om, -1.63366e-4, delta=1e-8)
        self.assertAlmostEqual(vibrow.beta_from_time(vibrow.time_from_beta(1.0, om), om), 1.0)
        p.delta = [0.04, 0.04, 0.04]
        with self.assertRaises(ValueError):
            vibrow.effective_coupling(p)

    def test_hamiltonian(self):
        p = vibrow.ModelParams.canonical()
        p.n_max = 2
        h = vibrow.hamiltonian(p)
        self.assertEqual(h.shape, (72, 72))
        self.assertLess(np.abs(h - h.conj().T).max(), 1e-14)
        hp = vibrow.hamiltonian(p, frame="polaron")
        np.testing.assert_allclose(np.linalg.eigvalsh(hp)[:8], np.linalg.eigvalsh(h)[:8], atol=1e-3)
        e = vibrow.branch_energies(p)
        self.assertAlmostEqual(e[4], 0.06)

    def test_metrics(self):
        bell = np.zeros((4, 4), complex)
        bell[0, 0] = bell[0, 3] = bell[3, 0] = bell[3, 3] = 0.5
        self.assertAlmostEqual(vibrow.concurrence(bell), 1.0)
        w = np.zeros((8, 1), complex)
        w[[1, 2, 4], 0] = 1 / math.sqrt(3)
        m = vibrow.entanglement_metrics(w)
        self.assertAlmostEqual(m["e_tau"], 4 / 3)
        self.assertAlmostEqual(m["c_min_sq"], 4 / 9)
        t = vibrow.target_w(1, 1)
        self.assertAlmostEqual(vibrow.fidelity(t, t), 1.0)
        self.assertAlmostEqual(vibrow.fidelity(t, vibrow.target_w(-1, 1)), 1 / 3)
        with self.assertRaises(ValueError):
            vibrow.entanglement_metrics(np.eye(5))

    def test_closed_series_and_peaks(self):
        p = vibrow.ModelParams.canonical()
        p.n_max = 2
        s = vibrow.closed_series(p, beta_max=3.0, samples=121)
        self.assertEqual(len(s["beta"]), 121)
        peaks = vibrow.detect_peaks(s["beta"], s["e_tau"])
        self.assertTrue(any(abs(b - 1.0) < 0.15 and h > 1.2 for b, h, _ in peaks))

    def test_config_roundtrip(self):
        with tempfile.TemporaryDirectory() as d:
            cfg = {"experiment": "fig3_closed", "n_max": 1, "beta_max": 1.0, "samples": 11,
                   "convergence": False, "out": d}
            man = vibrow.run_config(cfg)
            self.assertEqual(man["rows"], 11)
            self.assertTrue(os.path.exists(os.path.join(d, "data.csv")))
            cols = vibrow.compute_config(cfg)
            self.assertEqual(len(cols["fidelity_plus"]), 11)
            with self.assertRaises(ValueError):
                vibrow.compute_config({"experiment": "fig3_closed", "colour": 3})


if __name__ == "__main__":
    unittest.main()
