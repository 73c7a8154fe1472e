from .cka import cka_grid, grid_rows, hsic, linear_cka
from .embeddings import EmbeddingMatrix, decode_table, embedding_matrix, encode_table, table_rows
from .uniformity import neighbor_distance, normalize_rows, normalized_distance, uniformity
