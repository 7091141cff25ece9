from hypothesis import settings

# fixed example streams keep the statistical properties reproducible
settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")
