"""Write UCI-format iris.data and wdbc.data from the copies bundled with scikit-learn.

Offline fallback for scripts/fetch_data.sh. scikit-learn does not ship the
banknote data, so that file still has to be downloaded.
The bundled breast-cancer copy has no patient ids; row numbers are written instead.
"""
import csv
import os
import sys

import sklearn

src = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data")
dest = sys.argv[1] if len(sys.argv) > 1 else "data"
os.makedirs(dest, exist_ok=True)

species = ["Iris-setosa", "Iris-versicolor", "Iris-virginica"]
with open(os.path.join(src, "iris.csv")) as f, open(os.path.join(dest, "iris.data"), "w") as out:
    rows = list(csv.reader(f))[1:]
    for r in rows:
        out.write(",".join(r[:4] + [species[int(r[4])]]) + "\n")

diagnosis = ["M", "B"]
with open(os.path.join(src, "breast_cancer.csv")) as f, open(os.path.join(dest, "wdbc.data"), "w") as out:
    rows = list(csv.reader(f))[1:]
    for i, r in enumerate(rows):
        out.write(",".join([str(i + 1), diagnosis[int(r[30])]] + r[:30]) + "\n")
