"""
Arithmetic templates
====================

"""
from srml import parse_document
from srml.expr import EvalContext, eval_template, parse_template
from srml.errors import EvalError

doc = parse_document(
    "<book><qty>5</qty><price>100</price><discount>10</discount><tax>25</tax><total/></book>"
)
total = doc.root.element_children()[-1]
template = "#(../qty)*#(../price)*(1-#(../discount)/100)*(1+#(../tax)/100)"

print(parse_template(template))  # prints back as a template
print(eval_template(template, EvalContext(total, "")))

# placeholders must resolve to numbers
for bad in ("#(../missing)", "#(../qty)/(#(../qty)-5)"):
    try:
        eval_template(bad, EvalContext(total, ""))
    except EvalError as exc:
        print(exc)
