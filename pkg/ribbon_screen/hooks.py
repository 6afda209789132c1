from . import __version__ as app_version

app_name = "ribbon_screen"
app_title = "Ribbon Screen"
app_publisher = "Ribbon Screen contributors"
app_description = "Knot Floer homology, dilatation bounds and ribbon concordance screening"
app_email = "maintainers@ribbon-screen.invalid"
app_license = "MIT"

# Document Events
# ---------------
# Knot Record enriches itself in validate(); no cross-document hooks yet

# doc_events = {
# 	"Knot Record": {
# 		"on_update": "method",
# 	}
# }
