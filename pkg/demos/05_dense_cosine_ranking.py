"""
Dense retrieval from embedding files
====================================

Embeddings are produced by an external encoder and consumed from files:
NDJSON (one {"id", "vector"} per line) or the packed EMB1 binary, which
round-trip bit-exactly at 32-bit precision. Ranking is exact cosine over
every candidate, accumulated in double precision.
"""
import os
import tempfile

import numpy as np

from citeval import cosine, dense_top_k, read_embeddings
from citeval.dense import write_ndjson, write_packed

rng = np.random.default_rng(42)
dim = 8

# a query direction plus candidates at varying angles from it
query_vec = rng.standard_normal(dim)
records = [("pool:1", query_vec + 0.1 * rng.standard_normal(dim)),
           ("pool:2", query_vec + 1.0 * rng.standard_normal(dim)),
           ("pool:3", rng.standard_normal(dim)),
           ("pool:4", -query_vec)]
records = [(pid, vec.astype(np.float32)) for pid, vec in records]

workdir = tempfile.mkdtemp(prefix="dense-demo-")
ndjson_path = os.path.join(workdir, "pool.ndjson")
packed_path = os.path.join(workdir, "pool.emb1")
with open(ndjson_path, "w") as fh:
    write_ndjson(records, fh)
with open(packed_path, "wb") as fh:
    write_packed(records, fh, dim)

text_store = read_embeddings(ndjson_path)
binary_store = read_embeddings(packed_path)
assert text_store.matrix.tobytes() == binary_store.matrix.tobytes()
print(f"both formats load {len(text_store)} vectors of dim {text_store.dim}, bit-identical\n")

print("cosine of pool:1 vs pool:4 (antipode):",
      round(cosine(text_store.vector("pool:1"), text_store.vector("pool:4")), 4))

# query embeddings may live in their own store; here the query is pool:1
print("\nranking of the other candidates against pool:1:")
candidates = [pid for pid in text_store.ids if pid != "pool:1"]
for doc, score in dense_top_k(text_store, "pool:1", candidates, k=3):
    print(f"  {doc}  {score:+.4f}")
