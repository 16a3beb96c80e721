"""
Querying a document with location paths
=======================================

"""
from pathlib import Path

from srml import parse_file
from srml.paths import evaluate, parse_path, string_value

books = parse_file(Path(__file__).parent / "data" / "books.xml").root

# attribute predicates select on value or just on presence
print(evaluate('//book[@author="Jules Verne"]/title/text()', books))
for title in evaluate("//book[@author]/title", books):
    print("  has author:", string_value(title))

# positions count among siblings of the same parent
print(evaluate("/books/book[4]/title/text()", books))

# paths parse to a small immutable tree and print back canonically
path = parse_path("../book[2]/@author")
print([str(s) for s in path.steps], path.terminal, "->", path)

# relative paths start from any element; ".." climbs to the parent
hobbit = evaluate("book[2]/title", books)[0]
print(evaluate("../@author", hobbit))
