from .artifact import artifact
from .checkpoint import checkpoint
from .report import report
from .table import embedding_table
