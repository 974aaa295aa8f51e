# # Min-Max localization
#
# Each range becomes a square around its anchor. The estimate is the center
# of the squares' intersection. It is cheap, and it never moves far when one
# range is too long, because a long range only loosens its own square.

from uwbfusion import Anchor, min_max, multilateration_ls
from uwbfusion.localization import min_max_box

anchors = [Anchor(0, 0, 0), Anchor(1, 10, 0), Anchor(2, 0, 10), Anchor(3, 10, 10)]
tag = (3.0, 4.0)
exact = [(a, ((a.x - tag[0]) ** 2 + (a.y - tag[1]) ** 2) ** 0.5) for a in anchors]

print("box:", min_max_box(exact))
print("min-max:", min_max(exact))
print("least squares:", multilateration_ls(exact))

# ## One inflated range (an NLOS link)
inflated = [(a, r + (4.0 if a.id == 3 else 0.0)) for a, r in exact]
print("min-max with anchor 3 four metres long:", min_max(inflated))
print("least squares with the same error:     ", multilateration_ls(inflated))
