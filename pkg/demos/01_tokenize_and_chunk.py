"""Token counting and document chunking on the fixture corpus.

Run from the repository root:  python3 demos/01_tokenize_and_chunk.py
"""

from railadvisor import ChunkMode, ChunkPolicy, chunk_document, count_tokens, tokenize
from railadvisor.fixture_corpus import fixture_documents

sample = "CR400AF动车组牵引丢失，故障代码3454。"
print(f"text: {sample}")
print(f"tokens ({count_tokens(sample)}): {tokenize(sample)}")
print()

docs = fixture_documents()
manual = next(d for d in docs if "CR400AF_Series" in d.source_path)
print(f"document: {manual.source_path} ({manual.token_count} tokens)")

print("\n-- structural chunks (one per heading) --")
for chunk in chunk_document(manual, ChunkPolicy(mode=ChunkMode.STRUCTURAL)):
    first_line = chunk.text.splitlines()[0]
    print(f"  [{chunk.ordinal}] {chunk.token_count:4d} tokens | {first_line}")

print("\n-- fixed 120-token windows --")
for chunk in chunk_document(manual, ChunkPolicy(chunk_size=120)):
    print(f"  [{chunk.ordinal}] {chunk.token_count:4d} tokens")

policy = ChunkPolicy(chunk_size=120)
chunks = chunk_document(manual, policy)
print("\nlossless:", "".join(c.text for c in chunks) == manual.text)
