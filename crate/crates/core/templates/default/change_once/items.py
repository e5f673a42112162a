# Item definitions for the {{name}} project.

import scrapy


class {{project_class}}Item(scrapy.Item):
    url = scrapy.Field()
    title = scrapy.Field()
