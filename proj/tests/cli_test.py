# Copyright 2026 The Watson Perceptual Loss Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#    http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the watson CLI: exit codes, JSON schemas, determinism.

Usage: cli_test.py <watson binary> <schema directory>
"""

import filecmp
import json
import math
import os
import pathlib
import subprocess
import sys
import tempfile
import unittest

import jsonschema
import referencing

BINARY = ""
SCHEMAS = pathlib.Path()


def load_registry():
    resources = []
    for path in SCHEMAS.glob("*.schema.json"):
        doc = json.loads(path.read_text())
        resources.append((path.name, referencing.Resource.from_contents(doc)))
    return referencing.Registry().with_resources(resources)


def run(*args, env=None):
    return subprocess.run([BINARY, *map(str, args)], capture_output=True,
                          text=True, env=env, check=False)


class CliTest(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.dir = pathlib.Path(cls.tmp.name)
        cls.registry = load_registry()
        out = run("make-synthetic", "--out", cls.dir / "syn", "--records", 12,
                  "--patch-size", 16, "--seed", 5, "--json")
        assert out.returncode == 0, out.stderr
        cls.synthetic = json.loads(out.stdout)
        cls.manifest = pathlib.Path(cls.synthetic["manifest"])
        cls.ref = cls.dir / "syn" / "train" / "ref" / "000000.png"
        cls.p0 = cls.dir / "syn" / "train" / "p0" / "000000.png"

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def validate(self, doc, schema):
        validator = jsonschema.Draft202012Validator(
            {"$ref": schema}, registry=self.registry)
        validator.validate(doc)

    def run_json(self, *args, schema):
        out = run(*args, "--json")
        self.assertEqual(out.returncode, 0, out.stderr)
        doc = json.loads(out.stdout)
        self.validate(doc, schema)
        return doc

    def train(self, out, *extra):
        return run("train-2afc", "--train", self.manifest, "--out", out,
                   "--epochs", 2, "--batch-size", 4, "--seed", 9, *extra)

    def test_make_synthetic_schema_and_determinism(self):
        self.validate(self.synthetic, "make_synthetic.schema.json")
        self.assertEqual(self.synthetic["records"], 12)
        again = run("make-synthetic", "--out", self.dir / "again",
                    "--records", 12, "--patch-size", 16, "--seed", 5)
        self.assertEqual(again.returncode, 0, again.stderr)
        self.assertTrue(filecmp.cmp(self.manifest, self.dir / "again" / "train.csv",
                                    shallow=False))

    def test_compare_identity(self):
        out = run("compare", self.ref, self.ref)
        self.assertEqual(out.returncode, 0, out.stderr)
        self.assertAlmostEqual(float(out.stdout), 1e-10 ** 0.25, delta=1e-12)
        out = run("compare", "--metric", "ssim", self.ref, self.ref)
        self.assertEqual(float(out.stdout), 0.0)

    def test_compare_json(self):
        doc = self.run_json("compare", self.ref, self.p0,
                            schema="compare.schema.json")
        self.assertEqual(doc["metric"], "watson-dft-color")
        weighted = sum(c["lambda"] * c["value"] for c in doc["channels"])
        self.assertTrue(math.isclose(weighted, doc["value"], rel_tol=1e-12))
        doc = self.run_json("compare", "--metric", "l2", "--seed", 3, self.ref,
                            self.p0, schema="compare.schema.json")
        self.assertNotIn("channels", doc)

    def test_compare_exit_codes(self):
        self.assertEqual(run("compare", "--metric", "nope", self.ref,
                             self.ref).returncode, 1)
        self.assertEqual(run("compare", "--params", "absent.json", self.ref,
                             self.ref).returncode, 1)
        self.assertEqual(run("compare", self.ref).returncode, 1)
        self.assertEqual(run("compare", self.ref,
                             self.dir / "missing.png").returncode, 2)
        small = self.dir / "small"
        out = run("make-synthetic", "--out", small, "--records", 1,
                  "--patch-size", 8)
        self.assertEqual(out.returncode, 0, out.stderr)
        out = run("compare", self.ref, small / "train" / "ref" / "000000.png")
        self.assertEqual(out.returncode, 2)
        self.assertIn("16x16", out.stderr.replace(" ", ""))
        bad = self.dir / "bad.json"
        bad.write_text("{\"variant\": \"dft\"}")
        self.assertEqual(run("compare", "--params", bad, self.ref,
                             self.ref).returncode, 2)

    def test_eval_json(self):
        doc = self.run_json("eval-2afc", "--data", self.manifest,
                            schema="eval_report.schema.json")
        self.assertEqual(doc["records"], 12)
        self.assertEqual(sum(g["records"] for g in doc["groups"]), 12)
        bapps = self.run_json("eval-2afc", "--data", self.dir / "syn" / "train",
                              schema="eval_report.schema.json")
        self.assertEqual(bapps, doc)

    def test_train_report_params_and_reproducibility(self):
        params_a = self.dir / "a.json"
        params_b = self.dir / "b.json"
        report = self.dir / "report.json"
        out = self.train(params_a, "--report", report, "--test", self.manifest)
        self.assertEqual(out.returncode, 0, out.stderr)
        doc = json.loads(report.read_text())
        self.validate(doc, "train_report.schema.json")
        self.assertEqual(len(doc["loss_curve"]), 2)
        self.assertIn("initial_evaluation", doc)
        self.validate(json.loads(params_a.read_text()), "params.schema.json")
        out = self.train(params_b)
        self.assertEqual(out.returncode, 0, out.stderr)
        self.assertTrue(filecmp.cmp(params_a, params_b, shallow=False))

        env = dict(os.environ, WATSON_PARAMS_DIR=str(self.dir))
        out = run("compare", "--params", "a", self.ref, self.p0, env=env)
        self.assertEqual(out.returncode, 0, out.stderr)
        self.assertEqual(run("compare", "--params", "a", "--metric", "watson-dct",
                             self.ref, self.p0, env=env).returncode, 1)

    def test_train_rejects_baselines(self):
        out = self.train(self.dir / "x.json", "--metric", "l2")
        self.assertEqual(out.returncode, 1)

    def test_gradcheck(self):
        doc = self.run_json("gradcheck", "--metric", "watson-dct-grey",
                            "--metric", "l2", "--seeds", 2,
                            schema="gradcheck.schema.json")
        self.assertTrue(doc["passed"])
        self.assertEqual(len(doc["results"]), 3 + 2)
        # A coarse step makes the central difference visibly inexact.
        out = run("gradcheck", "--metric", "l2", "--seeds", 1, "--step", 0.2)
        self.assertEqual(out.returncode, 3)

    def test_bench(self):
        doc = self.run_json("bench", "--batch", 8, "--size", 32,
                            schema="bench.schema.json")
        self.assertEqual(doc["channels"], 3)
        self.assertLess(doc["forward_ms"], doc["forward_backward_ms"])


if __name__ == "__main__":
    BINARY = sys.argv[1]
    SCHEMAS = pathlib.Path(sys.argv[2])
    unittest.main(argv=sys.argv[:1], verbosity=2)
